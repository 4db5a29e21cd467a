#pragma once

#include <Eigen/Dense>
#include <vector>

namespace twincal {

// Binomial loss channel with survival probability eta, acting on
// photon-number distributions of dimension dim (photon numbers 0..dim-1).
// entries(i, j) = C(j, i) eta^i (1-eta)^(j-i) for j >= i; column stochastic.
struct LossMatrix {
    double eta = 1.0;
    Eigen::MatrixXd entries;

    int dim() const { return static_cast<int>(entries.rows()); }
};

// Geometry of a mode-multiplexed click detector: how the input mode splits
// into bins, and the photon-number truncation the response is built for.
struct MultiplexConfig {
    std::vector<double> bin_probabilities;
    int max_photons = 0;

    int bins() const { return static_cast<int>(bin_probabilities.size()); }
};

// Detector design matrix mapping photon number to click count.
// Rows are click counts 0..B, columns photon numbers 0..M.
// entries(k, m) = P(m photons routed independently occupy exactly k bins).
struct ConvolutionMatrix {
    Eigen::MatrixXd entries;

    int bins() const { return static_cast<int>(entries.rows()) - 1; }
    int max_photons() const { return static_cast<int>(entries.cols()) - 1; }
};

LossMatrix build_loss_matrix(double eta, int dim);

ConvolutionMatrix build_convolution_matrix(const MultiplexConfig& config);

// C * L: row i is the photon-number diagonal of the POVM element for
// outcome "i clicks". Requires c.max_photons() + 1 == l.dim().
Eigen::MatrixXd compose_povm_diagonals(const ConvolutionMatrix& c, const LossMatrix& l);

// Equal splitting into the given number of bins.
MultiplexConfig uniform_bins(int bins, int max_photons);

}  // namespace twincal
