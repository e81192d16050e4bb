#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "climdem/series.hpp"

namespace climdem {

/// Mean absolute percentage error, in percent.
[[nodiscard]] double mape(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);
[[nodiscard]] double rmse(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);
/// RMSE over the root mean squared deviation of the actuals from `train_mean`.
[[nodiscard]] double rsr(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted, double train_mean);
[[nodiscard]] double r_squared(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted, double train_mean);
/// Test MAE scaled by the in-sample mean absolute m-lag naive error.
[[nodiscard]] double mase(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted,
                          const Eigen::VectorXd& train, int m = 52);

struct MetricReport {
    double mape = 0.0;
    double rmse = 0.0;
    double rsr = 0.0;
    double r2 = 0.0;
    double mase = 0.0;
    int seasonal_lag = 52;
    double train_mean = 0.0;

    friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// All five metrics; r2 and rsr share one sum of squares so r2 = 1 - rsr^2.
[[nodiscard]] MetricReport evaluate_forecast(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted,
                                             const Eigen::VectorXd& train, int m = 52);

struct SplitSpec {
    enum class Mode { Holdout, Rolling };
    Eigen::Index train_length = 338;
    Eigen::Index horizon = 52;
    Mode mode = Mode::Holdout;
    Eigen::Index window = 260;
    Eigen::Index step = 52;
    void validate() const;
};

/// Row ranges [train_begin, train_end) and [test_begin, test_end).
struct SliceBounds {
    Eigen::Index train_begin = 0, train_end = 0, test_begin = 0, test_end = 0;
    friend bool operator==(const SliceBounds&, const SliceBounds&) = default;
};

[[nodiscard]] SliceBounds holdout_bounds(Eigen::Index panel_length, const SplitSpec& spec);
[[nodiscard]] std::vector<SliceBounds> rolling_bounds(Eigen::Index panel_length, const SplitSpec& spec);

[[nodiscard]] std::pair<PanelDataset, PanelDataset> holdout_split(const PanelDataset& panel, const SplitSpec& spec);
[[nodiscard]] std::vector<std::pair<PanelDataset, PanelDataset>> rolling_slices(const PanelDataset& panel,
                                                                                const SplitSpec& spec);

struct ComparisonRow {
    std::string model;
    MetricReport report;
    // Best value of each column (ties all flagged): mape, rmse, rsr, r2, mase.
    bool best_mape = false, best_rmse = false, best_rsr = false, best_r2 = false, best_mase = false;
};

[[nodiscard]] std::vector<ComparisonRow> compare_models(const std::vector<std::pair<std::string, MetricReport>>& reports);
[[nodiscard]] std::string comparison_csv(const std::vector<ComparisonRow>& table);
[[nodiscard]] std::string comparison_json(const std::vector<ComparisonRow>& table);

}  // namespace climdem
