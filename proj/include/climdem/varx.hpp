#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "climdem/calendar.hpp"

namespace climdem {

/// Exogenous regressors aligned to a weekly axis: Fourier pairs in t (weeks since the
/// first axis entry), the August-15 week dummy, then optional baseline columns.
struct ExogenousDesign {
    std::vector<Date> week_starts;
    Eigen::MatrixXd values;  ///< T x M
    std::vector<std::string> names;

    [[nodiscard]] Eigen::Index cols() const noexcept { return values.cols(); }
    [[nodiscard]] ExogenousDesign slice(Eigen::Index begin, Eigen::Index end) const;
};

struct BaselineColumn {
    std::string name;
    Eigen::VectorXd values;
};

[[nodiscard]] ExogenousDesign build_exogenous(const std::vector<Date>& week_starts,
                                              const std::vector<BaselineColumn>& baselines = {}, int harmonics = 1,
                                              bool august15_dummy = true);

struct VarxModel {
    int order = 0;
    Eigen::VectorXd intercept;           ///< K
    std::vector<Eigen::MatrixXd> coeff;  ///< A_1..A_p, K x K
    Eigen::MatrixXd exo_coeff;           ///< K x M
    Eigen::MatrixXd resid_cov;           ///< divisor T_eff - (1 + Kp + M)
    Eigen::MatrixXd residuals;           ///< (T - p) x K
    Eigen::MatrixXd std_errors;          ///< regressors x K, layout of `regressor_names`
    Eigen::MatrixXd design_inverse;      ///< (Z'Z)^-1 of the regressor matrix
    std::vector<std::string> variable_names;
    std::vector<std::string> exog_names;
    std::vector<std::string> regressor_names;  ///< const, <var>.l<i> blocks, exogenous names
    double spectral_radius = 0.0;
    double bic = 0.0;

    [[nodiscard]] Eigen::Index dim() const noexcept { return intercept.size(); }
    [[nodiscard]] Eigen::Index index_of(const std::string& name) const;
    /// Coefficients stacked as regressors x K in the `regressor_names` layout.
    [[nodiscard]] Eigen::MatrixXd stacked() const;
    void unstack(const Eigen::MatrixXd& stacked);
};

/// Fixed-order VARX fit on rows t = p..T-1. `exog` may have zero columns.
[[nodiscard]] VarxModel fit_varx(const Eigen::MatrixXd& endog, const Eigen::MatrixXd& exog, int p,
                                 const std::vector<std::string>& names = {},
                                 const std::vector<std::string>& exog_names = {});

/// Order by BIC over 1..max_order on the common sample, then refit.
[[nodiscard]] VarxModel fit_varx_bic(const Eigen::MatrixXd& endog, const Eigen::MatrixXd& exog, int max_order,
                                     const std::vector<std::string>& names = {},
                                     const std::vector<std::string>& exog_names = {});

/// Recursion y_t = nu + sum A_i y_{t-i} + B x_t + u_t for t = p..T-1 from the first p rows of `initial`.
[[nodiscard]] Eigen::MatrixXd simulate_varx(const VarxModel& model, const Eigen::MatrixXd& initial,
                                            const Eigen::MatrixXd& exog, const Eigen::MatrixXd& innovations);

[[nodiscard]] double stability_check(const VarxModel& model);

struct BootstrapInference {
    int n_replicates = 0;
    double level = 0.95;
    std::vector<Eigen::MatrixXd> draws;       ///< stacked coefficients per replicate
    std::vector<Eigen::MatrixXd> draw_covs;   ///< residual covariance per replicate
    Eigen::MatrixXd lower, upper;             ///< percentile bounds, stacked layout
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> significant;
    double shrink_applied = 1.0;              ///< set by bias_correct

    [[nodiscard]] Eigen::MatrixXd draw_mean() const;
};

struct BootstrapConfig {
    int n_replicates = 1000;
    double level = 0.95;
    std::uint64_t seed = 0;
    void validate() const;
};

/// Recursive-design residual bootstrap. `endog` supplies the initial p observations.
[[nodiscard]] BootstrapInference residual_bootstrap(const VarxModel& model, const Eigen::MatrixXd& endog,
                                                    const Eigen::MatrixXd& exog, const BootstrapConfig& cfg);

/// Bias correction with geometric shrinkage of the bias term until the companion matrix is stable.
/// Writes the applied factor into `inference.shrink_applied`.
[[nodiscard]] VarxModel bias_correct(const VarxModel& model, BootstrapInference& inference, double shrink_step = 0.9);

/// Coefficient report rows: equation, coefficient, estimate, lower, upper, significant.
[[nodiscard]] std::string coefficient_report_csv(const VarxModel& model, const BootstrapInference& inference);

/// H x K iterated one-step forecasts. `history` supplies at least p most recent rows.
[[nodiscard]] Eigen::MatrixXd forecast_recursive(const VarxModel& model, const Eigen::MatrixXd& history,
                                                 const Eigen::MatrixXd& exog_future, Eigen::Index horizon);

/// Orthogonalized responses Theta_h = Phi_h P, P lower Cholesky factor of the residual covariance.
/// Element (i, j) of response[h] is the response of variable i to shock j.
[[nodiscard]] std::vector<Eigen::MatrixXd> orthogonal_irf(const std::vector<Eigen::MatrixXd>& coeff,
                                                          const Eigen::MatrixXd& resid_cov, int horizon);

struct IrfResult {
    std::vector<std::string> variable_names;
    std::vector<Eigen::MatrixXd> response;  ///< h = 0..horizon
    std::vector<Eigen::MatrixXd> lower, upper;  ///< empty without inference
};

[[nodiscard]] IrfResult irf(const VarxModel& model, int horizon = 26, const BootstrapInference* inference = nullptr,
                            double level = 0.95);
[[nodiscard]] std::string irf_csv(const IrfResult& result);

/// share[h](i, j): fraction of the h-step forecast error variance of variable i due to shock j.
[[nodiscard]] std::vector<Eigen::MatrixXd> fevd_shares(const std::vector<Eigen::MatrixXd>& coeff,
                                                       const Eigen::MatrixXd& resid_cov, const std::vector<int>& horizons);

struct FevdResult {
    std::vector<std::string> variable_names;
    std::vector<int> horizons;
    std::vector<Eigen::MatrixXd> point;
    std::vector<Eigen::MatrixXd> mean, lower, upper;  ///< bootstrap summaries; point copies without inference
};

[[nodiscard]] std::vector<int> default_fevd_horizons();
[[nodiscard]] FevdResult fevd(const VarxModel& model, const std::vector<int>& horizons,
                              const BootstrapInference* inference = nullptr, double level = 0.95);
[[nodiscard]] std::string fevd_csv(const FevdResult& result);

struct GrangerTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int df = 0;
    int n_replicates = 0;
};

/// Wald test that `cause`'s lags vanish from `effect`'s equation, with a bootstrap null
/// generated from the restricted model. p = (1 + #{W* >= W}) / (1 + B).
[[nodiscard]] GrangerTestResult granger_test_time_domain(const VarxModel& model, const Eigen::MatrixXd& endog,
                                                         const Eigen::MatrixXd& exog, const std::string& cause,
                                                         const std::string& effect, const BootstrapConfig& cfg);

}  // namespace climdem
