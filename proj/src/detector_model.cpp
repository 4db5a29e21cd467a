#include "twincal/detector_model.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace twincal {

namespace {

// Pascal triangle up to n; plenty for the photon numbers handled here.
std::vector<std::vector<double>> binomial_table(int n) {
    std::vector<std::vector<double>> c(n + 1);
    for (int i = 0; i <= n; ++i) {
        c[i].assign(i + 1, 1.0);
        for (int j = 1; j < i; ++j) c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
    }
    return c;
}

}  // namespace

LossMatrix build_loss_matrix(double eta, int dim) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw std::invalid_argument("efficiency must lie in [0, 1]");
    }
    if (dim < 1) {
        throw std::invalid_argument("loss matrix needs at least one photon number");
    }
    auto binom = binomial_table(dim);
    LossMatrix l;
    l.eta = eta;
    l.entries = Eigen::MatrixXd::Zero(dim, dim);
    for (int j = 0; j < dim; ++j) {
        for (int i = 0; i <= j; ++i) {
            l.entries(i, j) = binom[j][i] * std::pow(eta, i) * std::pow(1.0 - eta, j - i);
        }
    }
    return l;
}

ConvolutionMatrix build_convolution_matrix(const MultiplexConfig& config) {
    const int bins = config.bins();
    const int max_photons = config.max_photons;
    if (bins < 1) throw std::invalid_argument("multiplex config needs at least one bin");
    if (max_photons < 0) throw std::invalid_argument("negative photon truncation");
    double total = 0.0;
    for (double q : config.bin_probabilities) {
        if (q < 0.0 || q > 1.0) throw std::invalid_argument("bin probability outside [0, 1]");
        total += q;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("bin probabilities must sum to 1");
    }

    auto binom = binomial_table(max_photons);
    ConvolutionMatrix c;
    c.entries = Eigen::MatrixXd::Zero(bins + 1, max_photons + 1);
    for (int m = 0; m <= max_photons; ++m) {
        // f(s, k): probability that s of the m photons are still headed for
        // the bins not yet processed and k bins are occupied so far
        Eigen::MatrixXd f = Eigen::MatrixXd::Zero(m + 1, bins + 1);
        f(m, 0) = 1.0;
        double remaining = 1.0;
        for (int t = 0; t < bins; ++t) {
            const double p = remaining > 0.0
                                 ? std::min(1.0, config.bin_probabilities[t] / remaining)
                                 : 0.0;
            Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m + 1, bins + 1);
            for (int s = 0; s <= m; ++s) {
                for (int k = 0; k <= bins; ++k) {
                    const double w = f(s, k);
                    if (w == 0.0) continue;
                    for (int j = 0; j <= s; ++j) {
                        const double split =
                            binom[s][j] * std::pow(p, j) * std::pow(1.0 - p, s - j);
                        g(s - j, k + (j > 0 ? 1 : 0)) += w * split;
                    }
                }
            }
            f = std::move(g);
            remaining -= config.bin_probabilities[t];
        }
        c.entries.col(m) = f.row(0).transpose();
    }
    return c;
}

Eigen::MatrixXd compose_povm_diagonals(const ConvolutionMatrix& c, const LossMatrix& l) {
    if (c.max_photons() + 1 != l.dim()) {
        throw std::invalid_argument("detector matrix photon range does not match loss matrix");
    }
    return c.entries * l.entries;
}

MultiplexConfig uniform_bins(int bins, int max_photons) {
    MultiplexConfig cfg;
    cfg.bin_probabilities.assign(bins, 1.0 / bins);
    cfg.max_photons = max_photons;
    return cfg;
}

}  // namespace twincal
