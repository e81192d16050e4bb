#include <doctest.h>

#include <fstream>
#include <sstream>

#include "climdem/pipeline.hpp"
#include "climdem/parallel.hpp"

using namespace climdem;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("climdem_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::InvalidInput;
}

std::string message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

// Small but complete configuration for quick end-to-end runs.
RunConfig quick_config() {
    RunConfig cfg;
    cfg.gc.n_replicates = 100;
    cfg.select_forest.n_trees = 60;
    cfg.forecast.forest.n_trees = 60;
    cfg.forecast.varx_replicates = 100;
    cfg.diagnostics.n_replicates = 100;
    cfg.lasso_grid = 6;
    cfg.lasso_cv_step = 13;
    cfg.gc_causes = {"temperature", "precipitation"};
    cfg.gc_conditioning = {"specific_humidity"};
    return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config text: sections, comments, and every parse problem at once") {
    const auto kv = KeyValueConfig::parse("# run settings\n[run]\nseed = 7 ; trailing\n\n[gc]\nalpha=0.1\n");
    CHECK(kv.entries().at("run.seed") == "7");
    CHECK(kv.entries().at("gc.alpha") == "0.1");

    const std::string msg = message_of([] { (void)KeyValueConfig::parse("[gc]\nalpha\nalpha = 1\nalpha = 2\n[bad\n"); });
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("duplicate key 'gc.alpha'") != std::string::npos);
    CHECK(msg.find("line 5") != std::string::npos);
}

TEST_CASE("unknown keys and bad values are reported together") {
    KeyValueConfig kv;
    kv.set("gc.bogus", "1");
    kv.set("gc.replicates", "many");
    kv.set("varx.bias_correct", "perhaps");
    CHECK(kind_of([&] { (void)run_config_from(kv); }) == ErrorKind::Config);
    const std::string msg = message_of([&] { (void)run_config_from(kv); });
    CHECK(msg.find("gc.bogus") != std::string::npos);
    CHECK(msg.find("gc.replicates") != std::string::npos);
    CHECK(msg.find("varx.bias_correct") != std::string::npos);
}

TEST_CASE("validation lists every violated field") {
    RunConfig cfg;
    cfg.gc.alpha = 2.0;
    cfg.lasso_order = 0;
    cfg.forecast.varx_level = 1.5;
    const std::string msg = message_of([&] { cfg.validate(); });
    CHECK(msg.find("[gc]") != std::string::npos);
    CHECK(msg.find("lasso.order") != std::string::npos);
    CHECK(msg.find("varx.level") != std::string::npos);
}

TEST_CASE("the logged config replays to the same configuration") {
    RunConfig cfg = quick_config();
    cfg.seed = 123;
    cfg.synth.temperature_effect = {-2500.0, -100.5, 0.0, 0.0};
    cfg.synth.level_shifts = {{100, -1.25e4}};
    cfg.forecast.trend.changepoint_penalty = 0.1;
    const std::string text = run_config_text(cfg);
    const RunConfig back = run_config_from(KeyValueConfig::parse(text));
    CHECK(run_config_text(back) == text);
    CHECK(back.synth.level_shifts.front().shift == -1.25e4);
    CHECK(back.gc_conditioning == cfg.gc_conditioning);
    CHECK(*back.forecast.trend.changepoint_penalty == 0.1);
    CHECK(config_reference().find("gc.block_length") != std::string::npos);
}

TEST_CASE("model names and forecast files round trip") {
    for (auto k : {ModelKind::Trend, ModelKind::Varx, ModelKind::VarxNoTemperature, ModelKind::Forest})
        CHECK(parse_model_kind(model_name(k)) == k);
    CHECK(kind_of([] { (void)parse_model_kind("arima"); }) == ErrorKind::Config);

    ForecastFile f{"trend", {parse_iso_date("2022-06-27"), parse_iso_date("2022-07-04")}, Eigen::Vector2d(1.5, 2.25)};
    const fs::path dir = scratch("forecast_file");
    std::ofstream(dir / "f.csv") << forecast_csv(f);
    const ForecastFile back = read_forecast_csv(dir / "f.csv");
    CHECK(back.model == "trend");
    CHECK(back.week_starts == f.week_starts);
    CHECK(back.values == f.values);
    CHECK(error_json("lookup", "unknown column 'x'") == R"({"error":{"kind":"lookup","message":"unknown column 'x'"}})");
}

TEST_CASE("gc command is byte-identical across runs and thread counts; unknown columns are named") {
    const RunConfig cfg = quick_config();
    SynthConfig sc = cfg.synth;
    const PanelDataset panel = generate_synthetic_panel(sc);
    const fs::path a = scratch("gc_a"), b = scratch("gc_b");
    set_thread_count(1);
    (void)cmd_gc(panel, "temperature", "drug_demand", std::nullopt, cfg, a);
    set_thread_count(4);
    (void)cmd_gc(panel, "temperature", "drug_demand", std::nullopt, cfg, b);
    set_thread_count(0);
    const std::string name = "gc_temperature_to_drug_demand.csv";
    CHECK(slurp(a / name) == slurp(b / name));
    CHECK_FALSE(slurp(a / name).empty());

    CHECK(kind_of([&] { (void)cmd_gc(panel, "nope", "drug_demand", std::nullopt, cfg, a); }) == ErrorKind::Lookup);
    CHECK(message_of([&] { (void)cmd_gc(panel, "nope", "drug_demand", std::nullopt, cfg, a); }).find("'nope'") !=
          std::string::npos);
}

TEST_CASE("pipeline runs end to end and its artifacts feed the individual commands") {
    const RunConfig cfg = quick_config();
    const fs::path out = scratch("pipeline");
    const PipelineResult res = cmd_pipeline(cfg, out);
    CHECK(res.evaluation.table.size() == 4);
    CHECK(res.gc.size() == 4);  // two causes, the reverse direction, one conditional
    for (const auto& p : res.written) CHECK(fs::exists(p));
    CHECK(fs::exists(out / "evaluation" / "comparison.csv"));
    CHECK(fs::exists(out / "models" / "varx_irf.csv"));
    CHECK(fs::exists(out / "gc" / "gc_temperature_to_drug_demand_given_specific_humidity.csv"));

    // replay from the logged artifacts
    const RunConfig logged = run_config_from(KeyValueConfig::read(out / "run_config.ini"));
    const PanelDataset panel = ingest_panel_csv(out / "features.csv");
    const fs::path again = scratch("pipeline_replay");
    const FitResult fit = cmd_fit_forecast(panel, ModelKind::Forest, logged, again, false);
    CHECK(slurp(again / "forecast_forest.csv") == slurp(out / "models" / "forecast_forest.csv"));
    CHECK(fit.written.size() == 1);
    const EvaluateResult ev = cmd_evaluate({out / "models" / "forecast_trend.csv", again / "forecast_forest.csv"}, panel,
                                           logged, again);
    CHECK(ev.reports.size() == 2);
    CHECK(ev.reports[1].second == res.evaluation.reports[3].second);

    // features from the synthetic daily file reproduce the climate columns of the panel
    const PanelDataset synth_panel = ingest_panel_csv(out / "synth" / "panel.csv");
    CHECK(panel.column("drug_demand") == synth_panel.column("drug_demand"));
    CHECK((panel.column("temperature") - synth_panel.column("temperature")).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("evaluate rejects forecasts outside the panel") {
    const RunConfig cfg = quick_config();
    const PanelDataset panel = generate_synthetic_panel(cfg.synth);
    const fs::path dir = scratch("evaluate_cover");
    ForecastFile f{"late", {panel.week_starts().back() + std::chrono::days{7}}, Eigen::VectorXd::Constant(1, 1.0)};
    std::ofstream(dir / "late.csv") << forecast_csv(f);
    CHECK(kind_of([&] { (void)cmd_evaluate({dir / "late.csv"}, panel, cfg, dir); }) == ErrorKind::Coverage);
}

}  // TEST_SUITE
