#include "climdem/workflow.hpp"

#include "climdem/random.hpp"

namespace climdem {

std::vector<Date> following_weeks(Date last, Eigen::Index count) {
    std::vector<Date> out;
    for (Eigen::Index i = 1; i <= count; ++i) out.push_back(last + std::chrono::days{7 * i});
    return out;
}

Baselines fit_baselines(const PanelDataset& train, Eigen::Index horizon, const ForecastSetup& setup) {
    require(horizon >= 1, ErrorKind::Config, "forecast horizon must be >= 1");
    Baselines b;
    auto fit = [&](const std::string& name, TrendModel& model, Eigen::VectorXd& path) {
        model = fit_trend_model(train.column(name), setup.trend);
        path.resize(train.length() + horizon);
        path << fitted_values(model), forecast(model, horizon);
    };
    fit(setup.target, b.target_model, b.target);
    fit(setup.temperature, b.temperature_model, b.temperature);
    return b;
}

ExogenousDesign forecast_exogenous(const PanelDataset& train, Eigen::Index horizon, const Baselines& baselines,
                                   bool with_baselines) {
    std::vector<Date> axis = train.week_starts();
    const auto future = following_weeks(axis.back(), horizon);
    axis.insert(axis.end(), future.begin(), future.end());
    std::vector<BaselineColumn> cols;
    if (with_baselines) {
        cols.push_back({"baseline_target", baselines.target});
        cols.push_back({"baseline_temperature", baselines.temperature});
    }
    return build_exogenous(axis, cols, 1, true);
}

Eigen::VectorXd forecast_trend(const PanelDataset& train, Eigen::Index horizon, const ForecastSetup& setup) {
    return forecast(fit_trend_model(train.column(setup.target), setup.trend), horizon);
}

VarxRun forecast_varx(const PanelDataset& train, Eigen::Index horizon, const ForecastSetup& setup,
                      bool with_temperature) {
    const Baselines base = fit_baselines(train, horizon, setup);
    VarxRun run;
    std::vector<std::string> names;
    if (with_temperature) names.push_back(setup.temperature);
    names.push_back(setup.target);
    run.endog = train.matrix(names);
    run.exog = forecast_exogenous(train, horizon, base, true);
    if (!with_temperature) {
        // Drop the temperature baseline too, so no temperature information enters.
        run.exog.values.conservativeResize(Eigen::NoChange, run.exog.values.cols() - 1);
        run.exog.names.pop_back();
    }
    const Eigen::Index t = train.length();
    const Eigen::MatrixXd exog_train = run.exog.values.topRows(t);
    run.estimate = setup.varx_order > 0
                       ? fit_varx(run.endog, exog_train, setup.varx_order, names, run.exog.names)
                       : fit_varx_bic(run.endog, exog_train, setup.varx_max_order, names, run.exog.names);
    run.model = run.estimate;
    if (setup.varx_replicates > 0) {
        BootstrapConfig bc;
        bc.n_replicates = setup.varx_replicates;
        bc.level = setup.varx_level;
        bc.seed = substream(setup.seed, "varx-bootstrap");
        run.inference = residual_bootstrap(run.estimate, run.endog, exog_train, bc);
        if (setup.varx_bias_correct && stability_check(run.estimate) < 1.0)
            run.model = bias_correct(run.estimate, *run.inference, setup.varx_shrink);
    }
    const Eigen::MatrixXd path = forecast_recursive(run.model, run.endog, run.exog.values.bottomRows(horizon), horizon);
    run.forecast = path.col(path.cols() - 1);
    return run;
}

ForestRun forecast_forest(const PanelDataset& train, Eigen::Index horizon, const ForecastSetup& setup) {
    const Baselines base = fit_baselines(train, horizon, setup);
    const ExogenousDesign exog = forecast_exogenous(train, horizon, base, true);
    const Eigen::Index t = train.length();
    PanelDataset design(train.week_starts());
    design.set(setup.target, train.column(setup.target));
    design.set(setup.temperature, train.column(setup.temperature));
    for (Eigen::Index j = 0; j < exog.cols(); ++j)
        design.set(exog.names[static_cast<std::size_t>(j)], exog.values.col(j).head(t));
    ForestRun run;
    run.data = lagged_design_matrix(design, setup.target, setup.lags, exog.names);
    ForestConfig cfg = setup.forest;
    cfg.seed = substream(setup.seed, "forest-forecast");
    run.model = train_forest(run.data, cfg);

    Eigen::MatrixXd history(t + horizon, 2);
    history.topRows(t) = train.matrix(std::vector<std::string>{setup.target, setup.temperature});
    run.forecast.resize(horizon);
    for (Eigen::Index h = 0; h < horizon; ++h) {
        const Eigen::VectorXd extras = exog.values.row(t + h).transpose();
        const Eigen::VectorXd x = lagged_feature_row(history.topRows(t + h), setup.lags, extras);
        run.forecast(h) = predict(run.model, x);
        history(t + h, 0) = run.forecast(h);
        history(t + h, 1) = base.temperature(t + h);
    }
    return run;
}

}  // namespace climdem
