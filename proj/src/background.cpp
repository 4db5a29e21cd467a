#include "twincal/background.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "twincal/errors.hpp"
#include "twincal/nnls.hpp"

namespace twincal {

namespace {

constexpr double kPi = 3.14159265358979323846;

// residual of the windowed indistinguishability system at a trial loss,
// with the witness mean pinned by an extra row (the raw system is satisfied
// by a whole one-parameter family of witness states)
NnlsResult equivalence_system(double loss, int max_photons,
                              const Eigen::MatrixXd& d) {
    const int n = max_photons + 1;
    const double eta = 1.0 - loss;
    auto l = build_loss_matrix(eta, n);

    const int window_rows = n * (n + 1) / 2;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(window_rows + 3, 2 * n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(window_rows + 3);
    int row = 0;
    for (int m = 0; m < n; ++m) {
        for (int col = 0; col <= m; ++col) {
            A(row, col) += d(m, col);
            A(row, n + m) -= l.entries(col, m);
            ++row;
        }
    }
    const double target_mean = 2.0 * max_photons / std::exp(1.0);
    for (int m = 0; m < n; ++m) A(row, m) = m - target_mean;
    ++row;
    for (int m = 0; m < n; ++m) A(row, m) = 1.0;
    b[row] = 1.0;
    ++row;
    for (int m = 0; m < n; ++m) A(row, n + m) = 1.0;
    b[row] = 1.0;

    return nnls(A, b);
}

// truncated Poisson weights with the mean pinned to the anchor value, used
// for the degenerate zero-background point where every loss value fits
Eigen::VectorXd pinned_poisson(int max_photons) {
    const int n = max_photons + 1;
    const double target_mean = 2.0 * max_photons / std::exp(1.0);
    auto mean_at = [&](double beta) {
        double coeff = 1.0, num = 0.0, den = 0.0;
        for (int m = 0; m < n; ++m) {
            num += m * coeff;
            den += coeff;
            coeff *= beta / (m + 1);
        }
        return num / den;
    };
    double lo = 1e-9, hi = 1e6;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_at(mid) < target_mean ? lo : hi) = mid;
    }
    const double beta = 0.5 * (lo + hi);
    Eigen::VectorXd w(n);
    double coeff = 1.0;
    for (int m = 0; m < n; ++m) {
        w[m] = coeff;
        coeff *= beta / (m + 1);
    }
    return w / w.sum();
}

Eigen::MatrixXcd dft2(const Eigen::MatrixXd& x, int sign) {
    const int n1 = static_cast<int>(x.rows());
    const int n2 = static_cast<int>(x.cols());
    Eigen::MatrixXcd f(n1, n2);
    for (int u = 0; u < n1; ++u) {
        for (int v = 0; v < n2; ++v) {
            std::complex<double> acc = 0.0;
            for (int a = 0; a < n1; ++a) {
                for (int c = 0; c < n2; ++c) {
                    const double phase =
                        sign * 2.0 * kPi * (double(u) * a / n1 + double(v) * c / n2);
                    acc += x(a, c) * std::complex<double>(std::cos(phase), std::sin(phase));
                }
            }
            f(u, v) = acc;
        }
    }
    return f;
}

Eigen::MatrixXd idft2(const Eigen::MatrixXcd& f) {
    const int n1 = static_cast<int>(f.rows());
    const int n2 = static_cast<int>(f.cols());
    Eigen::MatrixXd x(n1, n2);
    for (int a = 0; a < n1; ++a) {
        for (int c = 0; c < n2; ++c) {
            std::complex<double> acc = 0.0;
            for (int u = 0; u < n1; ++u) {
                for (int v = 0; v < n2; ++v) {
                    const double phase =
                        2.0 * kPi * (double(u) * a / n1 + double(v) * c / n2);
                    acc += f(u, v) * std::complex<double>(std::cos(phase), std::sin(phase));
                }
            }
            x(a, c) = acc.real() / (n1 * n2);
        }
    }
    return x;
}

// maps click statistics back through the invertible square detector blocks
Eigen::MatrixXd deconvolve(const Eigen::MatrixXd& p, const Eigen::MatrixXd& s1,
                           const Eigen::MatrixXd& s2) {
    Eigen::MatrixXd y = s1.triangularView<Eigen::Upper>().solve(p);
    Eigen::MatrixXd zt = s2.triangularView<Eigen::Upper>().solve(y.transpose());
    return zt.transpose();
}

}  // namespace

Eigen::MatrixXd background_matrix(const BackgroundModel& model) {
    if (model.dim < 1) throw std::invalid_argument("background matrix needs dimension >= 1");
    if (model.mean_photons < 0.0) throw std::invalid_argument("negative background mean");
    const int n = model.dim;
    Eigen::VectorXd weights(n);
    double term = 1.0;
    for (int k = 0; k < n; ++k) {
        weights[k] = term;
        term *= model.mean_photons / (k + 1);
    }
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int col = 0; col < n; ++col) {
        double sum = 0.0;
        for (int m = col; m < n; ++m) {
            d(m, col) = weights[m - col];
            sum += d(m, col);
        }
        d.col(col) /= sum;
    }
    return d;
}

JointPhotonStatistics add_background(const JointPhotonStatistics& sigma, double alpha1,
                                     double alpha2) {
    if (sigma.entries.rows() != sigma.entries.cols()) {
        throw std::invalid_argument("joint photon statistics must be square");
    }
    const int n = static_cast<int>(sigma.entries.rows());
    auto d1 = background_matrix({alpha1, n});
    auto d2 = background_matrix({alpha2, n});
    JointPhotonStatistics out;
    out.entries = d1 * sigma.entries * d2.transpose();
    const double total = out.entries.sum();
    if (total > 0.0) out.entries /= total;
    return out;
}

std::vector<EquivalencePoint> solve_loss_background_equivalence(
    int max_photons, const std::vector<double>& alpha_grid) {
    if (max_photons < 1) throw std::invalid_argument("need at least one resolvable photon");
    const int n = max_photons + 1;

    std::vector<EquivalencePoint> points;
    points.reserve(alpha_grid.size());
    for (double alpha : alpha_grid) {
        if (alpha < 0.0) throw std::invalid_argument("negative background mean");
        EquivalencePoint point;
        point.alpha = alpha;
        if (alpha == 0.0) {
            point.loss = 0.0;
            point.residual = 0.0;
            point.sigma_a = pinned_poisson(max_photons);
            point.sigma_b = point.sigma_a;
            point.found = true;
            points.push_back(point);
            continue;
        }

        auto d = background_matrix({alpha, n});
        auto residual_at = [&](double loss) {
            return equivalence_system(loss, max_photons, d).residual_norm;
        };

        const int coarse = 101;
        double best = 1e-6;
        double best_res = residual_at(best);
        int best_k = 0;
        for (int k = 1; k < coarse; ++k) {
            const double loss = 1e-6 + k * (1.0 - 2e-6) / (coarse - 1);
            const double res = residual_at(loss);
            if (res < best_res) {
                best_res = res;
                best = loss;
                best_k = k;
            }
        }
        double lo = 1e-6 + std::max(0, best_k - 1) * (1.0 - 2e-6) / (coarse - 1);
        double hi = 1e-6 + std::min(coarse - 1, best_k + 1) * (1.0 - 2e-6) / (coarse - 1);
        const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = hi - golden * (hi - lo);
        double e = lo + golden * (hi - lo);
        double fc = residual_at(c);
        double fe = residual_at(e);
        for (int it = 0; it < 80; ++it) {
            if (fc < fe) {
                hi = e;
                e = c;
                fe = fc;
                c = hi - golden * (hi - lo);
                fc = residual_at(c);
            } else {
                lo = c;
                c = e;
                fc = fe;
                e = lo + golden * (hi - lo);
                fe = residual_at(e);
            }
        }
        point.loss = 0.5 * (lo + hi);
        auto sol = equivalence_system(point.loss, max_photons, d);
        point.residual = sol.residual_norm;
        point.sigma_a = sol.x.head(n);
        point.sigma_b = sol.x.tail(n);
        const double sa = point.sigma_a.sum();
        const double sb = point.sigma_b.sum();
        if (sa > 0.0) point.sigma_a /= sa;
        if (sb > 0.0) point.sigma_b /= sb;
        point.found = sol.converged && point.residual < 1e-6;
        points.push_back(point);
    }
    return points;
}

SubtractionResult subtract_background(const JointOutcomeStatistics& measured,
                                      const JointOutcomeStatistics& background,
                                      const ConvolutionMatrix& c1,
                                      const ConvolutionMatrix& c2) {
    const int n1 = c1.bins() + 1;
    const int n2 = c2.bins() + 1;
    if (measured.entries.rows() != n1 || measured.entries.cols() != n2) {
        throw std::invalid_argument("measured histogram shape does not match the detectors");
    }
    if (background.entries.rows() != n1 || background.entries.cols() != n2) {
        throw std::invalid_argument("background histogram shape does not match the detectors");
    }
    if (c1.max_photons() + 1 < n1 || c2.max_photons() + 1 < n2) {
        throw NumericalError(
            "detector matrix has no invertible square block; "
            "needs max_photons >= bins");
    }

    const Eigen::MatrixXd s1 = c1.entries.leftCols(n1);
    const Eigen::MatrixXd s2 = c2.entries.leftCols(n2);
    const Eigen::MatrixXd pm = deconvolve(measured.probabilities(), s1, s2);
    const Eigen::MatrixXd pb = deconvolve(background.probabilities(), s1, s2);

    auto fm = dft2(pm, -1);
    auto fb = dft2(pb, -1);
    const double floor = 1e-10 * fb.cwiseAbs().maxCoeff();

    SubtractionResult result;
    Eigen::MatrixXcd quotient(n1, n2);
    for (int u = 0; u < n1; ++u) {
        for (int v = 0; v < n2; ++v) {
            if (std::abs(fb(u, v)) < floor) {
                quotient(u, v) = fm(u, v);
                ++result.floored_frequencies;
            } else {
                quotient(u, v) = fm(u, v) / fb(u, v);
            }
        }
    }

    Eigen::MatrixXd photon = idft2(quotient);
    for (int a = 0; a < n1; ++a) {
        for (int c = 0; c < n2; ++c) {
            if (photon(a, c) < 0.0) {
                result.clipped_mass += -photon(a, c);
                photon(a, c) = 0.0;
            }
        }
    }
    const double total = photon.sum();
    if (total <= 0.0) throw NumericalError("background removal left no probability mass");
    photon /= total;

    result.statistics.entries = s1 * photon * s2.transpose();
    result.statistics.trials = 0;
    return result;
}

}  // namespace twincal
