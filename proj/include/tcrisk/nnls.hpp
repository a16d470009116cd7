#pragma once

#include <Eigen/Dense>

namespace tcrisk {

struct NnlsOptions {
    double dual_tolerance = 1e-10;
    int max_iterations = 0;  ///< 0: 10*(k+1) outer iterations
};

/// Solves min ||A x - y||^2 subject to x >= 0 with the Lawson-Hanson active
/// set method, run on the normal equations A'A x = A'y. Terminates when every
/// dual component over the active set is <= dual_tolerance.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                     const NnlsOptions& options = {});

/// Same solver given the Gram matrix G = A'A and rhs b = A'y directly.
Eigen::VectorXd nnls_normal(const Eigen::MatrixXd& G, const Eigen::VectorXd& b,
                            const NnlsOptions& options = {});

}  // namespace tcrisk
