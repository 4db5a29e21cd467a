#pragma once

#include <Eigen/Dense>

#include "twincal/detector_model.hpp"

namespace twincal {

// Joint photon-number statistics of the two beams:
// entries(m, n) = P(m photons in beam 1 and n photons in beam 2).
struct JointPhotonStatistics {
    Eigen::MatrixXd entries;

    int dim() const { return static_cast<int>(entries.rows()); }
    double off_diagonal_mass() const;
    // Unpartnered excess photons over total photons:
    // sum |m-n| sigma(m,n) / sum (m+n) sigma(m,n).
    double unpaired_fraction() const;
};

// Photon-number-correlated state: sigma(m, n) = c_m delta(m, n).
struct CorrelatedState {
    Eigen::VectorXd diagonal;

    int dim() const { return static_cast<int>(diagonal.size()); }
    JointPhotonStatistics as_joint() const;
};

// Joint click statistics of the two detectors. Holds model probabilities
// (trials == 0) or measured/simulated counts with the trial total; counts
// are converted to probabilities exactly once, where an estimator consumes
// them.
struct JointOutcomeStatistics {
    Eigen::MatrixXd entries;
    long long trials = 0;

    Eigen::MatrixXd probabilities() const;
    int bins1() const { return static_cast<int>(entries.rows()) - 1; }
    int bins2() const { return static_cast<int>(entries.cols()) - 1; }
};

// p = C L sigma_vec: click-count distribution of one detector viewing the
// photon-number distribution sigma_vec.
Eigen::VectorXd predict_single(const ConvolutionMatrix& c, const LossMatrix& l,
                               const Eigen::VectorXd& sigma_vec);

// P = C1 L(eta1) sigma L(eta2)^T C2^T, the joint click statistics of two
// detectors viewing the joint state sigma.
JointOutcomeStatistics predict_joint(const ConvolutionMatrix& c1, double eta1,
                                     const JointPhotonStatistics& sigma, double eta2,
                                     const ConvolutionMatrix& c2);

}  // namespace twincal
