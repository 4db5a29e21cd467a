#include "twincal/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "twincal/errors.hpp"
#include "twincal/nnls.hpp"

namespace twincal {

namespace {

struct InnerProblem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
};

// Stack P = (C1 L1) sigma (C2 L2)^T as a linear map from the diagonal of
// sigma to the outcome matrix, row-major.
InnerProblem diagonal_problem(const Eigen::MatrixXd& P, const Eigen::MatrixXd& left,
                              const Eigen::MatrixXd& right) {
    const int rows1 = static_cast<int>(left.rows());
    const int rows2 = static_cast<int>(right.rows());
    const int dim = static_cast<int>(left.cols());
    InnerProblem prob;
    prob.A.resize(rows1 * rows2, dim);
    prob.b.resize(rows1 * rows2);
    for (int r = 0; r < rows1; ++r) {
        for (int s = 0; s < rows2; ++s) {
            prob.b[r * rows2 + s] = P(r, s);
            for (int i = 0; i < dim; ++i) {
                prob.A(r * rows2 + s, i) = left(r, i) * right(s, i);
            }
        }
    }
    return prob;
}

DiagonalFit fit_diagonal_probabilities(const Eigen::MatrixXd& P, double eta1, double eta2,
                                       const ConvolutionMatrix& c1,
                                       const ConvolutionMatrix& c2) {
    const int dim = c1.max_photons() + 1;
    auto left = compose_povm_diagonals(c1, build_loss_matrix(eta1, dim));
    auto right = compose_povm_diagonals(c2, build_loss_matrix(eta2, dim));
    auto prob = diagonal_problem(P, left, right);
    auto sol = nnls(prob.A, prob.b);
    DiagonalFit fit;
    fit.diagonal = sol.x;
    fit.residual = sol.residual_norm;
    fit.converged = sol.converged;
    return fit;
}

CorrelatedState normalized_state(const Eigen::VectorXd& raw) {
    const double total = raw.sum();
    Eigen::VectorXd d = raw;
    if (total > 0.0) {
        d /= total;
    } else {
        d.setZero();
        d[0] = 1.0;
    }
    return CorrelatedState{d};
}

void check_dimensions(const Eigen::MatrixXd& P, const ConvolutionMatrix& c1,
                      const ConvolutionMatrix& c2) {
    if (P.rows() != c1.bins() + 1 || P.cols() != c2.bins() + 1) {
        throw std::invalid_argument("histogram shape does not match the detector bin counts");
    }
    if (c1.max_photons() != c2.max_photons()) {
        throw std::invalid_argument("detector matrices use different photon truncations");
    }
}

}  // namespace

EfficiencyPair klyshko_efficiency(const KlyshkoRates& rates) {
    if (rates.R_i < 0.0 || rates.R_s < 0.0 || rates.R_c < 0.0) {
        throw std::invalid_argument("negative rate");
    }
    if (rates.R_i <= 0.0 || rates.R_s <= 0.0) {
        throw std::invalid_argument("zero singles rate leaves the estimate undefined");
    }
    if (rates.R_c > std::min(rates.R_i, rates.R_s) * (1.0 + 1e-12)) {
        throw std::invalid_argument("coincidences exceed a singles rate");
    }
    return {rates.R_c / rates.R_i, rates.R_c / rates.R_s};
}

KlyshkoRates klyshko_rates_from_histogram(const JointOutcomeStatistics& R) {
    KlyshkoRates rates;
    for (int k = 0; k < R.entries.rows(); ++k) {
        for (int l = 0; l < R.entries.cols(); ++l) {
            const double v = R.entries(k, l);
            if (k >= 1) rates.R_s += v;
            if (l >= 1) rates.R_i += v;
            if (k >= 1 && l >= 1) rates.R_c += v;
        }
    }
    return rates;
}

double biased_klyshko(double sigma11, double sigma22, double eta_s, double eta_i) {
    if (sigma11 < 0.0 || sigma22 < 0.0 || sigma11 + sigma22 <= 0.0) {
        throw std::invalid_argument("pair weights must be nonnegative and not both zero");
    }
    if (eta_s < 0.0 || eta_s > 1.0 || eta_i < 0.0 || eta_i > 1.0) {
        throw std::invalid_argument("efficiency outside [0, 1]");
    }
    const double numerator =
        sigma11 + (eta_s * eta_i - 2.0 * eta_s - 2.0 * eta_i + 4.0) * sigma22;
    const double denominator = sigma11 + (2.0 - eta_i) * sigma22;
    return numerator / denominator * eta_s;
}

DiagonalFit fit_diagonal_state(const JointOutcomeStatistics& R, double eta1, double eta2,
                               const ConvolutionMatrix& c1, const ConvolutionMatrix& c2) {
    auto P = R.probabilities();
    check_dimensions(P, c1, c2);
    if (eta1 < 0.0 || eta1 > 1.0 || eta2 < 0.0 || eta2 > 1.0) {
        throw std::invalid_argument("efficiency outside [0, 1]");
    }
    return fit_diagonal_probabilities(P, eta1, eta2, c1, c2);
}

CalibrationResult estimate_efficiencies(const JointOutcomeStatistics& R,
                                        const ConvolutionMatrix& c1,
                                        const ConvolutionMatrix& c2,
                                        const EstimateOptions& options) {
    auto P = R.probabilities();
    check_dimensions(P, c1, c2);
    if (options.grid < 2) throw std::invalid_argument("grid needs at least two points");

    int evaluations = 0;
    auto objective = [&](double e1, double e2) {
        ++evaluations;
        return fit_diagonal_probabilities(P, e1, e2, c1, c2).residual;
    };

    const int g = options.grid;
    Eigen::MatrixXd F(g, g);
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            F(i, j) = objective(i / double(g - 1), j / double(g - 1));
        }
    }
    const double fmin = F.minCoeff();

    // cells tied with the optimum, used for the flatness diagnostics and the
    // smallest-sum tie break
    int flat_count = 0;
    int best_i = 0, best_j = 0;
    double best_sum = std::numeric_limits<double>::infinity();
    bool eta1_spread = false, eta2_spread = false;
    int first_i = -1, first_j = -1;
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            if (F(i, j) <= fmin + options.flat_tolerance) {
                ++flat_count;
                if (first_i < 0) {
                    first_i = i;
                    first_j = j;
                }
                if (i != first_i) eta1_spread = true;
                if (j != first_j) eta2_spread = true;
                const double sum = (i + j) / double(g - 1);
                if (sum < best_sum - 1e-15) {
                    best_sum = sum;
                    best_i = i;
                    best_j = j;
                }
            }
        }
    }
    if (flat_count == g * g) {
        throw AmbiguousEstimateError("objective is flat over the whole efficiency grid",
                                     {"eta1", "eta2"});
    }

    // Nelder-Mead refinement from the chosen grid cell. Points outside the
    // unit square evaluate as infinite; that keeps every vertex inside the box
    // without collapsing the simplex onto an edge the way clamping would.
    auto eval = [&](const Eigen::Vector2d& v) {
        if (v[0] < 0.0 || v[0] > 1.0 || v[1] < 0.0 || v[1] > 1.0) {
            return std::numeric_limits<double>::infinity();
        }
        return objective(v[0], v[1]);
    };

    const double h = 0.5 / (g - 1);
    const double x0 = best_i / double(g - 1);
    const double y0 = best_j / double(g - 1);
    Eigen::Vector2d best_vertex(x0, y0);
    double best_value = F(best_i, best_j);

    // The residual valley can be a narrow curved trench; a single simplex run
    // tends to collapse part way along it. Restart with a fresh simplex at the
    // last optimum until that stops helping.
    for (int round = 0; round < 8; ++round) {
        const double bx = best_vertex[0], by = best_vertex[1];
        Eigen::Vector2d simplex[3] = {
            {bx, by},
            {bx + h <= 1.0 ? bx + h : bx - h, by},
            {bx, by + h <= 1.0 ? by + h : by - h},
        };
        double value[3] = {best_value, eval(simplex[1]), eval(simplex[2])};

        while (evaluations < options.max_evaluations) {
            int order[3] = {0, 1, 2};
            std::sort(order, order + 3, [&](int a, int b) { return value[a] < value[b]; });
            const int lo = order[0], mid = order[1], hi = order[2];

            const double size = std::max((simplex[lo] - simplex[mid]).norm(),
                                         std::max((simplex[lo] - simplex[hi]).norm(),
                                                  (simplex[mid] - simplex[hi]).norm()));
            if (size < options.simplex_tolerance) break;

            const Eigen::Vector2d centroid = 0.5 * (simplex[lo] + simplex[mid]);
            const Eigen::Vector2d reflected = centroid + (centroid - simplex[hi]);
            const double fr = eval(reflected);
            if (fr < value[lo]) {
                const Eigen::Vector2d expanded = centroid + 2.0 * (centroid - simplex[hi]);
                const double fe = eval(expanded);
                if (fe < fr) {
                    simplex[hi] = expanded;
                    value[hi] = fe;
                } else {
                    simplex[hi] = reflected;
                    value[hi] = fr;
                }
            } else if (fr < value[mid]) {
                simplex[hi] = reflected;
                value[hi] = fr;
            } else {
                const Eigen::Vector2d contracted = centroid + 0.5 * (simplex[hi] - centroid);
                const double fc = eval(contracted);
                if (fc < value[hi]) {
                    simplex[hi] = contracted;
                    value[hi] = fc;
                } else {
                    simplex[mid] = simplex[lo] + 0.5 * (simplex[mid] - simplex[lo]);
                    simplex[hi] = simplex[lo] + 0.5 * (simplex[hi] - simplex[lo]);
                    value[mid] = eval(simplex[mid]);
                    value[hi] = eval(simplex[hi]);
                }
            }
        }

        int best = 0;
        for (int k = 1; k < 3; ++k)
            if (value[k] < value[best]) best = k;
        const bool improved = value[best] < best_value - 1e-15;
        if (value[best] < best_value) {
            best_value = value[best];
            best_vertex = simplex[best];
        }
        if (!improved || evaluations >= options.max_evaluations) break;
    }
    const double eta1 = best_vertex[0];
    const double eta2 = best_vertex[1];

    auto fit = fit_diagonal_probabilities(P, eta1, eta2, c1, c2);
    ++evaluations;
    if (!fit.converged) throw NumericalError("inner least-squares solve did not converge");

    CalibrationResult result;
    result.eta1 = eta1;
    result.eta2 = eta2;
    result.fitted_diagonal = fit.diagonal;
    result.c = normalized_state(fit.diagonal);
    result.residual = fit.residual;
    result.evaluations = evaluations;
    result.ambiguous = flat_count > 1;
    if (result.ambiguous) {
        if (eta1_spread) result.flat_parameters.push_back("eta1");
        if (eta2_spread) result.flat_parameters.push_back("eta2");
    }
    return result;
}

Eigen::MatrixXd scan_residual_landscape(const JointOutcomeStatistics& R,
                                        const ConvolutionMatrix& c1,
                                        const ConvolutionMatrix& c2,
                                        const std::vector<double>& eta1_grid,
                                        const std::vector<double>& eta2_grid) {
    auto P = R.probabilities();
    check_dimensions(P, c1, c2);
    Eigen::MatrixXd F(eta1_grid.size(), eta2_grid.size());
    for (std::size_t i = 0; i < eta1_grid.size(); ++i) {
        for (std::size_t j = 0; j < eta2_grid.size(); ++j) {
            F(i, j) = fit_diagonal_probabilities(P, eta1_grid[i], eta2_grid[j], c1, c2).residual;
        }
    }
    return F;
}

int count_landscape_basins(const Eigen::MatrixXd& landscape, double plateau_tolerance) {
    const int rows = static_cast<int>(landscape.rows());
    const int cols = static_cast<int>(landscape.cols());
    Eigen::MatrixXi plateau = Eigen::MatrixXi::Constant(rows, cols, -1);

    // label connected plateaus (8-neighbor, equal within tolerance)
    int labels = 0;
    std::vector<std::pair<int, int>> stack;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (plateau(i, j) >= 0) continue;
            const int label = labels++;
            stack.push_back({i, j});
            plateau(i, j) = label;
            while (!stack.empty()) {
                auto [a, b] = stack.back();
                stack.pop_back();
                for (int da = -1; da <= 1; ++da) {
                    for (int db = -1; db <= 1; ++db) {
                        const int na = a + da, nb = b + db;
                        if (na < 0 || nb < 0 || na >= rows || nb >= cols) continue;
                        if (plateau(na, nb) >= 0) continue;
                        if (std::abs(landscape(na, nb) - landscape(a, b)) <= plateau_tolerance) {
                            plateau(na, nb) = label;
                            stack.push_back({na, nb});
                        }
                    }
                }
            }
        }
    }

    std::vector<bool> is_basin(labels, true);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            for (int da = -1; da <= 1; ++da) {
                for (int db = -1; db <= 1; ++db) {
                    const int na = i + da, nb = j + db;
                    if (na < 0 || nb < 0 || na >= rows || nb >= cols) continue;
                    if (plateau(na, nb) == plateau(i, j)) continue;
                    if (landscape(na, nb) < landscape(i, j)) is_basin[plateau(i, j)] = false;
                }
            }
        }
    }

    int count = 0;
    for (bool basin : is_basin) count += basin ? 1 : 0;
    return count;
}

JointReconstruction reconstruct_joint_statistics(const JointOutcomeStatistics& R,
                                                 double eta1, double eta2,
                                                 const ConvolutionMatrix& c1,
                                                 const ConvolutionMatrix& c2) {
    auto P = R.probabilities();
    check_dimensions(P, c1, c2);
    const int dim = c1.max_photons() + 1;
    auto left = compose_povm_diagonals(c1, build_loss_matrix(eta1, dim));
    auto right = compose_povm_diagonals(c2, build_loss_matrix(eta2, dim));
    const int rows1 = static_cast<int>(left.rows());
    const int rows2 = static_cast<int>(right.rows());

    Eigen::MatrixXd A(rows1 * rows2, dim * dim);
    Eigen::VectorXd b(rows1 * rows2);
    for (int r = 0; r < rows1; ++r) {
        for (int s = 0; s < rows2; ++s) {
            b[r * rows2 + s] = P(r, s);
            for (int m = 0; m < dim; ++m) {
                for (int n = 0; n < dim; ++n) {
                    A(r * rows2 + s, m * dim + n) = left(r, m) * right(s, n);
                }
            }
        }
    }
    auto sol = nnls(A, b);

    JointReconstruction rec;
    rec.sigma.entries = Eigen::MatrixXd::Zero(dim, dim);
    for (int m = 0; m < dim; ++m)
        for (int n = 0; n < dim; ++n) rec.sigma.entries(m, n) = sol.x[m * dim + n];
    const double total = rec.sigma.entries.sum();
    if (total > 0.0) rec.sigma.entries /= total;
    rec.residual = sol.residual_norm;
    rec.unpaired_fraction = rec.sigma.unpaired_fraction();
    rec.converged = sol.converged;
    return rec;
}

}  // namespace twincal
