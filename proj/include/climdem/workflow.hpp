#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "climdem/forest.hpp"
#include "climdem/series.hpp"
#include "climdem/trend.hpp"
#include "climdem/varx.hpp"

namespace climdem {

/// Settings shared by the three forecasting models.
struct ForecastSetup {
    std::string target = columns::drug_demand;
    std::string temperature = columns::temperature;
    int lags = 4;
    TrendFitConfig trend;
    ForestConfig forest;
    int varx_order = 0;  ///< 0 selects by BIC up to varx_max_order
    int varx_max_order = 4;
    int varx_replicates = 1000;  ///< residual-bootstrap draws; 0 skips inference and bias correction
    double varx_level = 0.95;
    bool varx_bias_correct = true;
    double varx_shrink = 0.9;
    std::uint64_t seed = 0;
};

/// Weekly axis continuing `count` weeks after `last`.
[[nodiscard]] std::vector<Date> following_weeks(Date last, Eigen::Index count);

/// Baseline trend fits of target and temperature: fitted over the training rows,
/// forecast over the next `horizon` weeks, concatenated.
struct Baselines {
    TrendModel target_model, temperature_model;
    Eigen::VectorXd target;       ///< train + horizon
    Eigen::VectorXd temperature;  ///< train + horizon
};

[[nodiscard]] Baselines fit_baselines(const PanelDataset& train, Eigen::Index horizon, const ForecastSetup& setup);

/// Exogenous design over train + horizon: single-harmonic Fourier pair, August-15 dummy and,
/// optionally, the two baseline columns.
[[nodiscard]] ExogenousDesign forecast_exogenous(const PanelDataset& train, Eigen::Index horizon,
                                                 const Baselines& baselines, bool with_baselines = true);

[[nodiscard]] Eigen::VectorXd forecast_trend(const PanelDataset& train, Eigen::Index horizon, const ForecastSetup& setup);

struct VarxRun {
    VarxModel estimate;                       ///< least-squares fit
    VarxModel model;                          ///< model used to forecast (bias-corrected when enabled)
    std::optional<BootstrapInference> inference;  ///< draws around `estimate`
    Eigen::MatrixXd endog;                    ///< training endogenous block, temperature first
    ExogenousDesign exog;                     ///< train + horizon
    Eigen::VectorXd forecast;                 ///< target path
};

/// VARX on (temperature, target) with the design of `forecast_exogenous`. Without
/// temperature the system reduces to an ARX model of the target alone.
[[nodiscard]] VarxRun forecast_varx(const PanelDataset& train, Eigen::Index horizon, const ForecastSetup& setup,
                                    bool with_temperature = true);

struct ForestRun {
    ForestModel model;
    SupervisedDataset data;
    Eigen::VectorXd forecast;
};

/// Forest on lags of target and temperature plus the exogenous columns, forecast recursively:
/// predicted target values feed back as lags, future temperature comes from its baseline forecast.
[[nodiscard]] ForestRun forecast_forest(const PanelDataset& train, Eigen::Index horizon, const ForecastSetup& setup);

}  // namespace climdem
