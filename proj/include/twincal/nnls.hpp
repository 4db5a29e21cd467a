#pragma once

#include <Eigen/Dense>

namespace twincal {

struct NnlsResult {
    Eigen::VectorXd x;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Nonnegative least squares, min ||A x - b|| s.t. x >= 0, by the classic
// active-set method (the lsqnonneg algorithm). Deterministic for fixed
// input. max_iterations <= 0 selects 10 * cols.
NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                int max_iterations = 0);

}  // namespace twincal
