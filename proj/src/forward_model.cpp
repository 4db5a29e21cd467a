#include "twincal/forward_model.hpp"

#include <cmath>
#include <stdexcept>

namespace twincal {

double JointPhotonStatistics::off_diagonal_mass() const {
    return entries.sum() - entries.diagonal().sum();
}

double JointPhotonStatistics::unpaired_fraction() const {
    double excess = 0.0, photons = 0.0;
    for (int m = 0; m < entries.rows(); ++m) {
        for (int n = 0; n < entries.cols(); ++n) {
            excess += std::abs(m - n) * entries(m, n);
            photons += (m + n) * entries(m, n);
        }
    }
    return photons > 0.0 ? excess / photons : 0.0;
}

JointPhotonStatistics CorrelatedState::as_joint() const {
    JointPhotonStatistics s;
    s.entries = diagonal.asDiagonal();
    return s;
}

Eigen::MatrixXd JointOutcomeStatistics::probabilities() const {
    if (trials <= 0) return entries;
    return entries / static_cast<double>(trials);
}

Eigen::VectorXd predict_single(const ConvolutionMatrix& c, const LossMatrix& l,
                               const Eigen::VectorXd& sigma_vec) {
    if (sigma_vec.size() != l.dim()) {
        throw std::invalid_argument("photon distribution length does not match loss matrix");
    }
    if (std::abs(sigma_vec.sum() - 1.0) > 1e-9) {
        throw std::invalid_argument("photon distribution is not normalized");
    }
    return compose_povm_diagonals(c, l) * sigma_vec;
}

JointOutcomeStatistics predict_joint(const ConvolutionMatrix& c1, double eta1,
                                     const JointPhotonStatistics& sigma, double eta2,
                                     const ConvolutionMatrix& c2) {
    const int dim = sigma.dim();
    if (sigma.entries.cols() != dim) {
        throw std::invalid_argument("joint photon statistics must be square");
    }
    auto l1 = build_loss_matrix(eta1, dim);
    auto l2 = build_loss_matrix(eta2, dim);
    auto left = compose_povm_diagonals(c1, l1);
    auto right = compose_povm_diagonals(c2, l2);
    JointOutcomeStatistics p;
    p.entries = left * sigma.entries * right.transpose();
    return p;
}

}  // namespace twincal
