#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace climdem {

struct DiagnosticConfig {
    int lags = 12;
    int n_replicates = 1000;
    std::uint64_t seed = 0;
    void validate(Eigen::Index n_rows) const;
};

struct DiagnosticResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int lags = 0;
    std::vector<double> equation_p_values;  ///< ARCH-LM only
};

/// Multivariate portmanteau Q = T sum_h tr(C_h' C_0^-1 C_h C_0^-1) on rows of `residuals`.
[[nodiscard]] double portmanteau_statistic(const Eigen::MatrixXd& residuals, int lags);

/// T R^2 of the regression of u_t^2 on a constant and u_{t-1}^2..u_{t-q}^2.
[[nodiscard]] double arch_lm_statistic(const Eigen::VectorXd& residual, int lags);

/// Bootstrap p-values from iid row resampling, (1 + #{stat* >= stat}) / (1 + B).
[[nodiscard]] DiagnosticResult portmanteau_test(const Eigen::MatrixXd& residuals, const DiagnosticConfig& cfg);
/// Per-equation tests combined by Bonferroni: p = min(1, K * min_i p_i).
[[nodiscard]] DiagnosticResult arch_lm_test(const Eigen::MatrixXd& residuals, const DiagnosticConfig& cfg);

}  // namespace climdem
