#include "twincal/nnls.hpp"

#include <limits>
#include <vector>

namespace twincal {

// Lawson-Hanson active set iteration: grow the passive (free) set greedily by
// the most positive gradient component, solve the unconstrained subproblem on
// it, and back off along the segment to the previous iterate whenever that
// subproblem leaves the feasible region.
NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iterations) {
    const int n = static_cast<int>(A.cols());
    if (max_iterations <= 0) max_iterations = 10 * n;
    const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                       A.cwiseAbs().colwise().sum().maxCoeff() *
                       static_cast<double>(A.rows());

    NnlsResult result;
    result.x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(n, false);

    Eigen::VectorXd w = A.transpose() * (b - A * result.x);
    int iterations = 0;
    while (iterations < max_iterations) {
        int candidate = -1;
        double best = tol;
        for (int j = 0; j < n; ++j) {
            if (!passive[j] && w[j] > best) {
                best = w[j];
                candidate = j;
            }
        }
        if (candidate < 0) {
            result.converged = true;
            break;
        }
        passive[candidate] = true;

        while (true) {
            ++iterations;
            std::vector<int> free_idx;
            for (int j = 0; j < n; ++j)
                if (passive[j]) free_idx.push_back(j);
            Eigen::MatrixXd Ap(A.rows(), free_idx.size());
            for (std::size_t k = 0; k < free_idx.size(); ++k) Ap.col(k) = A.col(free_idx[k]);
            Eigen::VectorXd z = Ap.colPivHouseholderQr().solve(b);

            double min_z = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < free_idx.size(); ++k) min_z = std::min(min_z, z[k]);
            if (min_z > 0.0) {
                for (std::size_t k = 0; k < free_idx.size(); ++k)
                    result.x[free_idx[k]] = z[k];
                break;
            }

            // step from x toward z only as far as feasibility allows
            double alpha = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < free_idx.size(); ++k) {
                if (z[k] <= 0.0) {
                    const double xi = result.x[free_idx[k]];
                    alpha = std::min(alpha, xi / (xi - z[k]));
                }
            }
            for (std::size_t k = 0; k < free_idx.size(); ++k) {
                const int j = free_idx[k];
                result.x[j] += alpha * (z[k] - result.x[j]);
                if (result.x[j] <= tol) {
                    result.x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if (iterations >= max_iterations) break;
        }
        w = A.transpose() * (b - A * result.x);
    }

    result.iterations = iterations;
    result.residual_norm = (A * result.x - b).norm();
    if (!result.converged) {
        // one last optimality check in case the loop ended exactly at the cap
        bool done = true;
        for (int j = 0; j < n; ++j) {
            if (!passive[j] && w[j] > tol) done = false;
        }
        result.converged = done;
    }
    return result;
}

}  // namespace twincal
