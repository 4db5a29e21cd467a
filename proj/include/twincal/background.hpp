#pragma once

#include <Eigen/Dense>
#include <vector>

#include "twincal/detector_model.hpp"
#include "twincal/forward_model.hpp"

namespace twincal {

// Poissonian stray light with mean photon number mean_photons per pulse,
// truncated to dimension dim.
struct BackgroundModel {
    double mean_photons = 0.0;
    int dim = 0;
};

// Lower-triangular matrix adding background photons to a photon-number
// distribution: entries(m, n) = d(m - n) for m >= n with d the Poisson
// weights, columns renormalized after truncation.
Eigen::MatrixXd background_matrix(const BackgroundModel& model);

// D(alpha1) sigma D(alpha2)^T, renormalized.
JointPhotonStatistics add_background(const JointPhotonStatistics& sigma,
                                     double alpha1, double alpha2);

struct EquivalencePoint {
    double alpha = 0.0;
    double loss = 0.0;       // l = 1 - eta equivalent to the background
    double residual = 0.0;
    Eigen::VectorXd sigma_a;  // witness state seen with background alpha
    Eigen::VectorXd sigma_b;  // witness state seen with loss l instead
    bool found = false;
};

// For each background level alpha, the loss l in the other beam that is
// statistically indistinguishable from it on a detector resolving photon
// numbers 0..max_photons: finds normalized nonnegative diagonal states
// sigma_a, sigma_b with D(alpha) sigma_a = sigma_b L(1-l)^T on that window.
//
// The solution set of that equation is a one-parameter family (one l for
// every witness-state brightness), so the solver pins the witness mean to
// 2 max_photons / e and scans l for the member achieving it; see README.
std::vector<EquivalencePoint> solve_loss_background_equivalence(
    int max_photons, const std::vector<double>& alpha_grid);

struct SubtractionResult {
    JointOutcomeStatistics statistics;
    double clipped_mass = 0.0;      // negative mass removed before renormalizing
    int floored_frequencies = 0;    // spectrum cells passed through undivided
};

// Removes independently measured background from click statistics:
// maps both histograms back to photon-number space through the inverted
// square detector matrices, divides their 2-D spectra, and maps the result
// forward again. Valid for photon-number content within the click range.
SubtractionResult subtract_background(const JointOutcomeStatistics& measured,
                                      const JointOutcomeStatistics& background,
                                      const ConvolutionMatrix& c1,
                                      const ConvolutionMatrix& c2);

}  // namespace twincal
