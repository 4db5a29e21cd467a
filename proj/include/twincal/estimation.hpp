#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "twincal/detector_model.hpp"
#include "twincal/forward_model.hpp"

namespace twincal {

// Singles and coincidence counts per acquisition.
struct KlyshkoRates {
    double R_i = 0.0;  // idler (detector 2) singles
    double R_s = 0.0;  // signal (detector 1) singles
    double R_c = 0.0;  // coincidences
};

struct EfficiencyPair {
    double eta_s = 0.0;
    double eta_i = 0.0;
};

// eta_s = R_c / R_i, eta_i = R_c / R_s.
EfficiencyPair klyshko_efficiency(const KlyshkoRates& rates);

// Rates from a click histogram: any nonzero click count is a binary click.
// R_s sums rows k >= 1, R_i columns l >= 1, R_c the (>=1, >=1) block.
KlyshkoRates klyshko_rates_from_histogram(const JointOutcomeStatistics& R);

// What the coincidence-to-singles quotient returns when the source emits two
// pairs with weight sigma22 alongside single pairs with weight sigma11.
// Overestimates eta_s whenever sigma22 > 0 and the efficiencies are below 1.
double biased_klyshko(double sigma11, double sigma22, double eta_s, double eta_i);

struct DiagonalFit {
    Eigen::VectorXd diagonal;  // raw nonnegative solution, not renormalized
    double residual = 0.0;     // Frobenius norm of R - P at this diagonal
    bool converged = true;
};

// Best nonnegative correlated diagonal at fixed efficiencies: linear least
// squares in the diagonal entries.
DiagonalFit fit_diagonal_state(const JointOutcomeStatistics& R, double eta1, double eta2,
                               const ConvolutionMatrix& c1, const ConvolutionMatrix& c2);

struct CalibrationResult {
    double eta1 = 0.0;
    double eta2 = 0.0;
    CorrelatedState c;                 // normalized view of fitted_diagonal
    Eigen::VectorXd fitted_diagonal;   // raw inner solution; reproduces residual
    double residual = 0.0;
    int evaluations = 0;               // inner solves performed
    bool ambiguous = false;            // near-optimal residual spans > 1 grid cell
    std::vector<std::string> flat_parameters;  // filled when ambiguous
};

struct EstimateOptions {
    int grid = 21;                 // coarse grid points per axis over [0, 1]
    double simplex_tolerance = 1e-6;
    int max_evaluations = 4000;
    double flat_tolerance = 1e-9;  // residual window counting as "tied"
};

// Outer search over (eta1, eta2): coarse grid, then Nelder-Mead refinement
// from the best cell, with fit_diagonal_state as the inner solve. Ties are
// broken toward the smallest eta1 + eta2. Throws AmbiguousEstimateError when
// the objective is flat over the whole grid.
CalibrationResult estimate_efficiencies(const JointOutcomeStatistics& R,
                                        const ConvolutionMatrix& c1,
                                        const ConvolutionMatrix& c2,
                                        const EstimateOptions& options = {});

// Inner-optimal residual at every grid point; grid vectors hold the eta
// values for each axis.
Eigen::MatrixXd scan_residual_landscape(const JointOutcomeStatistics& R,
                                        const ConvolutionMatrix& c1,
                                        const ConvolutionMatrix& c2,
                                        const std::vector<double>& eta1_grid,
                                        const std::vector<double>& eta2_grid);

// Number of local minima of a landscape under 8-neighbor comparison, with
// cells equal within plateau_tolerance merged into one plateau first.
int count_landscape_basins(const Eigen::MatrixXd& landscape, double plateau_tolerance = 1e-12);

struct JointReconstruction {
    JointPhotonStatistics sigma;
    double residual = 0.0;
    double unpaired_fraction = 0.0;
    bool converged = true;
};

// Full joint photon statistics (off-diagonals allowed) at fixed
// efficiencies, by nonnegative least squares over all entries.
JointReconstruction reconstruct_joint_statistics(const JointOutcomeStatistics& R,
                                                 double eta1, double eta2,
                                                 const ConvolutionMatrix& c1,
                                                 const ConvolutionMatrix& c2);

}  // namespace twincal
