#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "climdem/random.hpp"

namespace testing {

inline double max_rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, climdem::Rng& rng) {
    climdem::NormalSampler normal;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
}

/// Spectral radius as lim ||M^k||^(1/k), independent of any eigen solver.
inline double power_iteration_radius(const Eigen::MatrixXd& m, int iters = 4000) {
    double log_norm = 0.0;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(m.rows(), m.cols());
    for (int k = 0; k < iters; ++k) {
        acc = m * acc;
        const double n = acc.norm();
        if (n == 0.0) return 0.0;
        log_norm += std::log(n);
        acc /= n;
    }
    return std::exp(log_norm / iters);
}

// (1/2n)||y - Xb||^2 + lambda ||b||_1 by accelerated proximal gradient.
inline Eigen::VectorXd fista(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, int iters = 200000) {
    const double n = static_cast<double>(x.rows());
    const Eigen::MatrixXd g = x.transpose() * x / n;
    const Eigen::VectorXd c = x.transpose() * y / n;
    const double step = 1.0 / Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().maxCoeff();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(x.cols()), z = b, prev = b;
    double t = 1.0;
    for (int k = 0; k < iters; ++k) {
        const Eigen::VectorXd u = z - step * (g * z - c);
        b = u.unaryExpr([&](double v) { return std::copysign(std::max(std::abs(v) - step * lambda, 0.0), v); });
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = b + ((t - 1.0) / t_next) * (b - prev);
        if ((b - prev).cwiseAbs().maxCoeff() < 1e-15) break;
        prev = b;
        t = t_next;
    }
    return b;
}

// Subgradient optimality written out directly.
inline double kkt_gap(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& b, double lambda) {
    const Eigen::VectorXd grad = x.transpose() * (y - x * b) / static_cast<double>(x.rows());
    double worst = 0.0;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        const double v = b(j) != 0.0 ? std::abs(grad(j) - lambda * (b(j) > 0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(grad(j)) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace testing

using testing::max_rel_diff;
