#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "climdem/linalg.hpp"
#include "climdem/random.hpp"

namespace climdem {

/// Reduced-form VAR(p) with intercept, estimated by equation-wise least squares.
/// With identical regressors in every equation this coincides with SUR/GLS.
struct VarModel {
    int order = 0;
    Eigen::VectorXd intercept;             ///< K
    std::vector<Eigen::MatrixXd> coeff;    ///< p matrices K x K, coeff[i] multiplies y_{t-i-1}
    Eigen::MatrixXd resid_cov;             ///< K x K, divisor T_eff - Kp - 1
    Eigen::MatrixXd residuals;             ///< (T - p) x K
    std::vector<std::string> variable_names;
    double spectral_radius = 0.0;          ///< of the companion matrix
    double bic = 0.0;

    [[nodiscard]] Eigen::Index dim() const noexcept { return intercept.size(); }
};

enum class InfoCriterion { Bic, Aic };

/// Design row layout shared by VAR/VARX fits: [1, y_{t-1}', ..., y_{t-p}', x_t'].
/// Rows cover t = first_row .. T-1, first_row >= p.
[[nodiscard]] Eigen::MatrixXd lagged_regressors(const Eigen::MatrixXd& endog, int p, Eigen::Index first_row,
                                                const Eigen::MatrixXd* exog = nullptr);

/// Fixed-order fit on rows t = p..T-1.
[[nodiscard]] VarModel fit_var_order(const Eigen::MatrixXd& data, int p, std::span<const std::string> names = {});

/// Order chosen by the criterion over 1..max_order on the common sample t = max_order..T-1,
/// then refit on the full sample.
[[nodiscard]] VarModel fit_var(const Eigen::MatrixXd& data, int max_order, InfoCriterion criterion = InfoCriterion::Bic,
                               std::span<const std::string> names = {});

/// Order selection alone (returns the argmin order).
[[nodiscard]] int select_var_order(const Eigen::MatrixXd& data, int max_order, InfoCriterion criterion = InfoCriterion::Bic);

/// A(z) = I - sum_k A_k z^k evaluated at z = exp(-i omega).
[[nodiscard]] Eigen::MatrixXcd lag_polynomial(std::span<const Eigen::MatrixXd> coeff, double omega);

/// Simulates y_t = nu + sum A_i y_{t-i} + u_t given initial rows and innovations
/// (innovations.rows() new observations are appended after `initial`).
[[nodiscard]] Eigen::MatrixXd simulate_var(const Eigen::VectorXd& intercept, std::span<const Eigen::MatrixXd> coeff,
                                           const Eigen::MatrixXd& initial, const Eigen::MatrixXd& innovations);

/// Gaussian innovations with covariance `cov` (via its Cholesky factor).
[[nodiscard]] Eigen::MatrixXd gaussian_innovations(Eigen::Index n, const Eigen::MatrixXd& cov, Rng& rng);

}  // namespace climdem
