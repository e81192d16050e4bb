#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace climdem {

struct TrendFitConfig {
    int n_changepoints = 25;
    double changepoint_range = 0.8;  ///< fraction of the training span holding the grid
    int n_harmonics = 10;
    double period = 52.0;
    std::optional<double> changepoint_penalty;  ///< default 10 * SD(y)
    double tolerance = 1e-8;
    std::uint64_t seed = 0;  ///< unused by the deterministic fit, kept for run logs
    void validate() const;
};

/// Piecewise-linear trend g(t) = (k + sum_j a_j(t) d_j) t + m + sum_j a_j(t) g_j with
/// g_j = -s_j d_j and a_j(t) = [t >= s_j], plus s(t) = sum_n a_n cos(2 pi n t/P) + b_n sin(2 pi n t/P).
/// t counts weeks from the first training observation.
struct TrendModel {
    double base_rate = 0.0;
    double base_offset = 0.0;
    std::vector<double> changepoints;
    std::vector<double> rate_adjustments;
    std::vector<double> offset_corrections;
    Eigen::VectorXd cos_coeffs;  ///< a_n
    Eigen::VectorXd sin_coeffs;  ///< b_n
    double period = 52.0;
    double noise_sigma = 0.0;
    double changepoint_penalty = 0.0;
    Eigen::Index n_train = 0;
    bool seasonality_identifiable = true;

    [[nodiscard]] double trend(double t) const;
    [[nodiscard]] double seasonal(double t) const;
};

/// Changepoint grid: S points spread uniformly over the first `range` share of n weeks.
[[nodiscard]] std::vector<double> changepoint_grid(Eigen::Index n, int count, double range = 0.8);

[[nodiscard]] TrendModel fit_trend_model(const Eigen::VectorXd& y, const TrendFitConfig& cfg = {});

/// Penalized objective sum (y - g - s)^2 + penalty * sum |d_j| of a model on its training data.
[[nodiscard]] double trend_objective(const TrendModel& model, const Eigen::VectorXd& y);

/// g(t) + s(t) for t = begin .. end-1.
[[nodiscard]] Eigen::VectorXd fitted_values(const TrendModel& model, Eigen::Index begin, Eigen::Index end);
[[nodiscard]] Eigen::VectorXd fitted_values(const TrendModel& model);

/// Weeks n_train .. n_train + horizon - 1.
[[nodiscard]] Eigen::VectorXd forecast(const TrendModel& model, Eigen::Index horizon);

}  // namespace climdem
