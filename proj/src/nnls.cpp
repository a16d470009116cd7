#include "tcrisk/nnls.hpp"

#include <vector>

#include "tcrisk/topology.hpp"

namespace tcrisk {

namespace {

// Unconstrained minimizer restricted to the passive set.
Eigen::VectorXd solve_passive(const Eigen::MatrixXd& G, const Eigen::VectorXd& b,
                              const std::vector<int>& passive) {
    const int p = static_cast<int>(passive.size());
    Eigen::MatrixXd Gp(p, p);
    Eigen::VectorXd bp(p);
    for (int i = 0; i < p; ++i) {
        bp(i) = b(passive[i]);
        for (int j = 0; j < p; ++j) Gp(i, j) = G(passive[i], passive[j]);
    }
    return Gp.ldlt().solve(bp);
}

}  // namespace

Eigen::VectorXd nnls_normal(const Eigen::MatrixXd& G, const Eigen::VectorXd& b,
                            const NnlsOptions& options) {
    const int k = static_cast<int>(G.rows());
    if (G.cols() != k || b.size() != k) throw Error("nnls: dimension mismatch");
    const int max_outer = options.max_iterations > 0 ? options.max_iterations : 10 * (k + 1);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
    std::vector<bool> in_passive(k, false);
    std::vector<int> passive;

    for (int outer = 0; outer < max_outer; ++outer) {
        // Dual w = b - G x; optimal when w <= tol outside the passive set.
        Eigen::VectorXd w = b - G * x;
        int enter = -1;
        double best = options.dual_tolerance;
        for (int i = 0; i < k; ++i) {
            if (!in_passive[i] && w(i) > best) {
                best = w(i);
                enter = i;
            }
        }
        if (enter < 0) return x;

        in_passive[enter] = true;
        passive.push_back(enter);

        while (true) {
            Eigen::VectorXd z = solve_passive(G, b, passive);
            bool feasible = true;
            for (int i = 0; i < static_cast<int>(passive.size()); ++i) {
                if (z(i) <= 0) {
                    feasible = false;
                    break;
                }
            }
            if (feasible) {
                x.setZero();
                for (int i = 0; i < static_cast<int>(passive.size()); ++i) x(passive[i]) = z(i);
                break;
            }
            // Step toward z until the first passive coordinate hits zero.
            double alpha = 1.0;
            for (int i = 0; i < static_cast<int>(passive.size()); ++i) {
                double xi = x(passive[i]);
                if (z(i) <= 0 && xi - z(i) > 0) alpha = std::min(alpha, xi / (xi - z(i)));
            }
            for (int i = 0; i < static_cast<int>(passive.size()); ++i) {
                double xi = x(passive[i]);
                x(passive[i]) = xi + alpha * (z(i) - xi);
            }
            // Drop every passive coordinate that reached zero.
            std::vector<int> kept;
            for (int idx : passive) {
                if (x(idx) > 1e-14) {
                    kept.push_back(idx);
                } else {
                    x(idx) = 0.0;
                    in_passive[idx] = false;
                }
            }
            if (kept.size() == passive.size()) {
                // Numerical stall; drop the smallest coordinate to make progress.
                int drop = 0;
                for (int i = 1; i < static_cast<int>(kept.size()); ++i)
                    if (x(kept[i]) < x(kept[drop])) drop = i;
                x(kept[drop]) = 0.0;
                in_passive[kept[drop]] = false;
                kept.erase(kept.begin() + drop);
            }
            passive = std::move(kept);
            if (passive.empty()) break;
        }
    }
    throw Error("nnls: active set method did not converge");
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                     const NnlsOptions& options) {
    if (A.rows() != y.size()) throw Error("nnls: dimension mismatch");
    Eigen::MatrixXd G = A.transpose() * A;
    Eigen::VectorXd b = A.transpose() * y;
    return nnls_normal(G, b, options);
}

}  // namespace tcrisk
