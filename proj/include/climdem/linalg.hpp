#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "climdem/error.hpp"

namespace climdem {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Linear-interpolation empirical quantile (type 7), q in [0, 1].
template <typename Scalar>
[[nodiscard]] Scalar quantile(std::vector<Scalar> values, double q) {
    require(!values.empty(), ErrorKind::EmptyInput, "quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const Scalar frac = static_cast<Scalar>(h - static_cast<double>(lo));
    return values[lo] + frac * (values[hi] - values[lo]);
}

template <typename Scalar>
[[nodiscard]] Scalar median(std::vector<Scalar> values) {
    return quantile(std::move(values), 0.5);
}

template <class Derived>
[[nodiscard]] typename Derived::Scalar mean(const Eigen::MatrixBase<Derived>& x) {
    return x.mean();
}

/// Standard deviation with divisor n - ddof.
template <class Derived>
[[nodiscard]] typename Derived::Scalar stddev(const Eigen::MatrixBase<Derived>& x, int ddof = 1) {
    using Scalar = typename Derived::Scalar;
    const Scalar mu = x.mean();
    return std::sqrt((x.array() - mu).square().sum() / static_cast<Scalar>(x.size() - ddof));
}

/// Kp x Kp companion matrix of the lag polynomial y_t = A_1 y_{t-1} + ... + A_p y_{t-p}.
template <typename Scalar>
[[nodiscard]] Matrix<Scalar> companion(std::span<const Matrix<Scalar>> lags) {
    require(!lags.empty(), ErrorKind::InvalidInput, "companion matrix needs at least one lag");
    const Eigen::Index k = lags.front().rows();
    const auto p = static_cast<Eigen::Index>(lags.size());
    Matrix<Scalar> c = Matrix<Scalar>::Zero(k * p, k * p);
    for (Eigen::Index i = 0; i < p; ++i) c.block(0, i * k, k, k) = lags[static_cast<std::size_t>(i)];
    if (p > 1) c.block(k, 0, k * (p - 1), k * (p - 1)).setIdentity();
    return c;
}

/// Largest eigenvalue modulus.
template <class Derived>
[[nodiscard]] double spectral_radius(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0.0;
    Eigen::EigenSolver<MatrixXd> solver(m.template cast<double>(), false);
    require(solver.info() == Eigen::Success, ErrorKind::Numerical, "eigenvalue computation failed");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Least-squares solution of X B = Y. Throws a rank-deficiency error naming the
/// offending columns when X is (numerically) singular.
struct LeastSquares {
    MatrixXd coef;       ///< regressors x responses
    MatrixXd residuals;  ///< rows of X x responses
    MatrixXd xtx_inv;    ///< (X'X)^-1, for standard errors
};

[[nodiscard]] LeastSquares least_squares(const MatrixXd& x, const MatrixXd& y,
                                         std::span<const std::string> column_names = {});

/// Column-wise mean and SD (divisor n - 1).
struct Standardization {
    VectorXd mean;
    VectorXd scale;
};

[[nodiscard]] Standardization column_standardization(const MatrixXd& x);

}  // namespace climdem
