#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "climdem/csv.hpp"
#include "climdem/parallel.hpp"
#include "climdem/pipeline.hpp"

namespace fs = std::filesystem;
using namespace climdem;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::string out_dir = ".";
    std::string config;
};

RunConfig load_config(const Globals& g) {
    RunConfig cfg;
    if (!g.config.empty()) cfg = run_config_from(KeyValueConfig::read(g.config));
    if (g.seed) cfg.seed = *g.seed;
    if (g.threads) cfg.threads = *g.threads;
    cfg.validate();
    set_thread_count(cfg.threads);
    return cfg;
}

// The effective config goes next to every command's output so the run can be replayed.
void log_config(const RunConfig& cfg, const fs::path& out) {
    fs::create_directories(out);
    csv::write_atomic(out / "run_config.ini", run_config_text(cfg));
}

PanelDataset load_panel(const std::string& path) { return ingest_panel_csv(path); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Climate-driven weekly demand analysis: spectral Granger causality, feature selection and forecasting."};
    app.require_subcommand(1);
    app.footer("\n" + config_reference());

    Globals g;
    auto add_globals = [&](CLI::App* sub) {
        sub->add_option("--seed", g.seed, "master seed (overrides run.seed)");
        sub->add_option("--threads", g.threads, "worker threads, 0 = all cores (overrides run.threads)");
        sub->add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();
        sub->add_option("--config", g.config, "config file, see the key reference below")->check(CLI::ExistingFile);
        sub->footer("\n" + config_reference());
    };

    std::string panel_path, daily_path, demand_path, cause, effect, given, model;
    std::vector<std::string> forecast_files;
    bool no_daily = false;

    auto* synth = app.add_subcommand("synth", "write a synthetic weekly panel and matching daily regional records");
    synth->add_flag("--no-daily", no_daily, "skip the daily file");

    auto* features = app.add_subcommand("features", "aggregate daily regional records to the national weekly panel");
    features->add_option("--daily", daily_path, "daily regional CSV")->required()->check(CLI::ExistingFile);
    features->add_option("--demand", demand_path, "weekly panel supplying the target column")->check(CLI::ExistingFile);

    auto* gc = app.add_subcommand("gc", "frequency-domain Granger-causality spectrum with bootstrap thresholds");
    gc->add_option("--panel", panel_path, "weekly panel CSV")->required()->check(CLI::ExistingFile);
    gc->add_option("--cause", cause, "cause column")->required();
    gc->add_option("--effect", effect, "effect column")->required();
    gc->add_option("--given", given, "conditioning column");

    auto* select = app.add_subcommand("select", "rank lagged features by random-forest importance");
    select->add_option("--panel", panel_path, "weekly panel CSV")->required()->check(CLI::ExistingFile);

    auto* fit = app.add_subcommand("fit", "fit a model, write its reports and its forecast");
    auto* fc = app.add_subcommand("forecast", "fit a model and write only its forecast");
    for (auto* sub : {fit, fc}) {
        sub->add_option("--panel", panel_path, "weekly panel CSV")->required()->check(CLI::ExistingFile);
        sub->add_option("--model", model, "trend, varx, varx_no_temperature or forest")->required();
    }

    auto* evaluate = app.add_subcommand("evaluate", "score forecast files against the panel and compare them");
    evaluate->add_option("--panel", panel_path, "weekly panel CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("forecasts", forecast_files, "forecast CSVs")->required()->check(CLI::ExistingFile);

    auto* pipeline = app.add_subcommand("pipeline", "synth, features, gc, select, fit every model, evaluate");

    for (auto* sub : {synth, features, gc, select, fit, fc, evaluate, pipeline}) add_globals(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << error_json("Usage", e.what()) << "\n";
        return 2;
    }

    try {
        const RunConfig cfg = load_config(g);
        const fs::path out = g.out_dir;
        log_config(cfg, out);
        if (*synth) {
            for (const auto& p : cmd_synth(cfg, out, !no_daily)) std::cout << p.string() << "\n";
        } else if (*features) {
            std::optional<fs::path> demand;
            if (!demand_path.empty()) demand = demand_path;
            (void)cmd_features(daily_path, demand, cfg, out);
            std::cout << (out / "features.csv").string() << "\n";
        } else if (*gc) {
            std::optional<std::string> cond;
            if (!given.empty()) cond = given;
            const auto r = cmd_gc(load_panel(panel_path), cause, effect, cond, cfg, out);
            std::cout << "var_order " << r.var_order << ", significant frequencies " << r.n_significant_bonferroni()
                      << " (Bonferroni) / " << r.n_significant_alpha() << " (alpha) of " << r.estimate.size() << "\n";
        } else if (*select) {
            const auto r = cmd_select(load_panel(panel_path), cfg, out);
            for (std::size_t i = 0; i < std::min<std::size_t>(10, r.ranking.size()); ++i)
                std::cout << r.ranking[i].first << " " << csv::format_number(r.ranking[i].second) << "\n";
        } else if (*fit || *fc) {
            const auto r = cmd_fit_forecast(load_panel(panel_path), parse_model_kind(model), cfg, out, fit->parsed());
            for (const auto& p : r.written) std::cout << p.string() << "\n";
        } else if (*evaluate) {
            std::vector<fs::path> files(forecast_files.begin(), forecast_files.end());
            const auto r = cmd_evaluate(files, load_panel(panel_path), cfg, out);
            for (const auto& [m, rep] : r.reports)
                std::cout << m << " rmse " << csv::format_number(rep.rmse) << " mase " << csv::format_number(rep.mase) << "\n";
        } else if (*pipeline) {
            const auto r = cmd_pipeline(cfg, out);
            for (const auto& [m, rep] : r.evaluation.reports)
                std::cout << m << " rmse " << csv::format_number(rep.rmse) << " mase " << csv::format_number(rep.mase) << "\n";
            std::cout << (out / "summary.json").string() << "\n";
        }
    } catch (const Error& e) {
        std::cerr << error_json(to_string(e.kind()), e.what()) << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << error_json("Internal", e.what()) << "\n";
        return 1;
    }
    return 0;
}
