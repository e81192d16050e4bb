#include "climdem/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "climdem/csv.hpp"
#include "climdem/random.hpp"
#include "climdem/sparse_var.hpp"

namespace climdem {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? std::string(sep) : "") + items[i];
    return out;
}

[[noreturn]] void bad_value(const std::string& v, const char* what) {
    fail(ErrorKind::Config, "'" + v + "' is not " + what);
}

template <class T>
T parse_integer(const std::string& v) {
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(v, "an integer");
    return out;
}

double parse_real(const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(v, "a number");
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(v, "a boolean");
}

std::vector<double> parse_reals(const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(parse_real(item));
    return out;
}

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt(const std::vector<double>& v) {
    std::vector<std::string> parts;
    for (double x : v) parts.push_back(fmt(x));
    return join(parts, ", ");
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct Field {
    const char* key;
    const char* help;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define INT_FIELD(key, member, help)                                                                  \
    Field{key, help, [](RunConfig& c, const std::string& v) { c.member = parse_integer<int>(v); }, \
          [](const RunConfig& c) { return std::to_string(c.member); }}
#define REAL_FIELD(key, member, help)                                                         \
    Field{key, help, [](RunConfig& c, const std::string& v) { c.member = parse_real(v); }, \
          [](const RunConfig& c) { return fmt(c.member); }}
#define BOOL_FIELD(key, member, help)                                                         \
    Field{key, help, [](RunConfig& c, const std::string& v) { c.member = parse_bool(v); }, \
          [](const RunConfig& c) { return fmt_bool(c.member); }}

const std::vector<Field>& fields() {
    static const std::vector<Field> table{
        Field{"run.seed", "master seed; every stochastic step draws from a named substream of it",
              [](RunConfig& c, const std::string& v) { c.seed = parse_integer<std::uint64_t>(v); },
              [](const RunConfig& c) { return std::to_string(c.seed); }},
        Field{"run.threads", "worker threads, 0 = all cores (results do not depend on it)",
              [](RunConfig& c, const std::string& v) { c.threads = parse_integer<std::size_t>(v); },
              [](const RunConfig& c) { return std::to_string(c.threads); }},
        Field{"data.target", "target column", [](RunConfig& c, const std::string& v) { c.target = v; },
              [](const RunConfig& c) { return c.target; }},
        Field{"data.temperature", "temperature column", [](RunConfig& c, const std::string& v) { c.temperature = v; },
              [](const RunConfig& c) { return c.temperature; }},

        Field{"synth.length", "weeks in the synthetic panel",
              [](RunConfig& c, const std::string& v) { c.synth.length = parse_integer<Eigen::Index>(v); },
              [](const RunConfig& c) { return std::to_string(c.synth.length); }},
        Field{"synth.start", "first week (a Monday, YYYY-MM-DD)",
              [](RunConfig& c, const std::string& v) { c.synth.start = parse_iso_date(v); },
              [](const RunConfig& c) { return format_iso_date(c.synth.start); }},
        REAL_FIELD("synth.temperature_mean", synth.temperature_mean, "mean temperature, C"),
        REAL_FIELD("synth.temperature_amplitude", synth.temperature_amplitude, "annual sinusoid amplitude, C"),
        REAL_FIELD("synth.temperature_phase_weeks", synth.temperature_phase_weeks, "week of the coldest point"),
        REAL_FIELD("synth.temperature_ar", synth.temperature_ar, "AR(1) coefficient of the temperature anomaly"),
        REAL_FIELD("synth.temperature_noise_sd", synth.temperature_noise_sd, "innovation SD of the anomaly, C"),
        REAL_FIELD("synth.demand_level", synth.demand_level, "baseline weekly demand"),
        Field{"synth.demand_ar", "demand AR coefficients, lags 1..L",
              [](RunConfig& c, const std::string& v) { c.synth.demand_ar = parse_reals(v); },
              [](const RunConfig& c) { return fmt(c.synth.demand_ar); }},
        Field{"synth.temperature_effect", "demand response per degree of lagged temperature, lags 1..L",
              [](RunConfig& c, const std::string& v) { c.synth.temperature_effect = parse_reals(v); },
              [](const RunConfig& c) { return fmt(c.synth.temperature_effect); }},
        REAL_FIELD("synth.demand_seasonal_amplitude", synth.demand_seasonal_amplitude, "own seasonal term of demand"),
        REAL_FIELD("synth.holiday_effect", synth.holiday_effect, "demand change in the week of August 15"),
        Field{"synth.level_shifts", "week:shift pairs, e.g. 222:-45000, 298:34000",
              [](RunConfig& c, const std::string& v) {
                  c.synth.level_shifts.clear();
                  for (const auto& item : split_list(v)) {
                      const auto colon = item.find(':');
                      if (colon == std::string::npos) bad_value(item, "a week:shift pair");
                      c.synth.level_shifts.push_back({parse_integer<Eigen::Index>(trim(item.substr(0, colon))),
                                                      parse_real(trim(item.substr(colon + 1)))});
                  }
              },
              [](const RunConfig& c) {
                  std::vector<std::string> parts;
                  for (const auto& s : c.synth.level_shifts) parts.push_back(std::to_string(s.week) + ":" + fmt(s.shift));
                  return join(parts, ", ");
              }},
        REAL_FIELD("synth.demand_noise_sd", synth.demand_noise_sd, "demand innovation SD"),
        INT_FIELD("synth.regions", daily_regions, "regions in the synthetic daily file"),

        REAL_FIELD("features.wet_day_threshold_mm", features.wet_day_threshold_mm, "wet-day threshold, mm"),
        REAL_FIELD("features.extreme_quantile", features.extreme_quantile, "per-region quantile defining extreme rain"),

        INT_FIELD("gc.replicates", gc.n_replicates, "stationary-bootstrap replicates"),
        REAL_FIELD("gc.alpha", gc.alpha, "significance level"),
        REAL_FIELD("gc.block_length", gc.expected_block_length, "mean bootstrap block length, 0 = ceil(T^(1/3))"),
        INT_FIELD("gc.max_var_order", gc.max_var_order, "largest VAR order tried by BIC"),
        BOOL_FIELD("gc.hp_cycle", gc_hp_cycle, "analyse HP cycles instead of the raw series"),
        REAL_FIELD("gc.hp_lambda", hp.lambda, "HP smoothing parameter"),
        Field{"gc.causes", "cause columns for the spectra into the target, empty = all climate columns",
              [](RunConfig& c, const std::string& v) { c.gc_causes = split_list(v); },
              [](const RunConfig& c) { return join(c.gc_causes, ", "); }},
        Field{"gc.conditioning", "conditioning columns for temperature -> target",
              [](RunConfig& c, const std::string& v) { c.gc_conditioning = split_list(v); },
              [](const RunConfig& c) { return join(c.gc_conditioning, ", "); }},

        INT_FIELD("select.lags", select_lags, "lags per column in the selection design"),
        INT_FIELD("select.trees", select_forest.n_trees, "trees"),
        INT_FIELD("select.mtry", select_forest.mtry, "features tried per split, 0 = ceil(F/3)"),
        INT_FIELD("select.min_node_size", select_forest.min_node_size, "nodes this small are not split"),
        Field{"select.block_length", "moving-block length, weeks",
              [](RunConfig& c, const std::string& v) { c.select_forest.block_length = parse_integer<Eigen::Index>(v); },
              [](const RunConfig& c) { return std::to_string(c.select_forest.block_length); }},

        INT_FIELD("lasso.order", lasso_order, "lag order of the sparse VAR"),
        INT_FIELD("lasso.grid_size", lasso_grid, "penalties on the log grid below the null threshold"),
        INT_FIELD("lasso.cv_step", lasso_cv_step, "spacing of rolling forecast origins"),

        Field{"split.train_length", "training weeks",
              [](RunConfig& c, const std::string& v) { c.split.train_length = parse_integer<Eigen::Index>(v); },
              [](const RunConfig& c) { return std::to_string(c.split.train_length); }},
        Field{"split.horizon", "forecast horizon, weeks",
              [](RunConfig& c, const std::string& v) { c.split.horizon = parse_integer<Eigen::Index>(v); },
              [](const RunConfig& c) { return std::to_string(c.split.horizon); }},

        INT_FIELD("trend.changepoints", forecast.trend.n_changepoints, "candidate changepoints"),
        REAL_FIELD("trend.changepoint_range", forecast.trend.changepoint_range, "fraction of training holding them"),
        INT_FIELD("trend.harmonics", forecast.trend.n_harmonics, "Fourier harmonics"),
        REAL_FIELD("trend.period", forecast.trend.period, "seasonal period, weeks"),
        Field{"trend.changepoint_penalty", "l1 weight on rate changes, empty = 10 * SD(y)",
              [](RunConfig& c, const std::string& v) {
                  if (v.empty()) c.forecast.trend.changepoint_penalty.reset();
                  else c.forecast.trend.changepoint_penalty = parse_real(v);
              },
              [](const RunConfig& c) {
                  return c.forecast.trend.changepoint_penalty ? fmt(*c.forecast.trend.changepoint_penalty) : std::string();
              }},

        INT_FIELD("varx.order", forecast.varx_order, "lag order, 0 = BIC"),
        INT_FIELD("varx.max_order", forecast.varx_max_order, "largest order tried by BIC"),
        INT_FIELD("varx.replicates", forecast.varx_replicates, "residual-bootstrap replicates, 0 = none"),
        REAL_FIELD("varx.level", forecast.varx_level, "confidence level of the bootstrap intervals"),
        BOOL_FIELD("varx.bias_correct", forecast.varx_bias_correct, "forecast with the bias-corrected model"),
        REAL_FIELD("varx.shrink", forecast.varx_shrink, "shrink factor keeping the corrected model stable"),
        INT_FIELD("varx.irf_horizon", irf_horizon, "impulse-response horizon, weeks"),

        INT_FIELD("forest.lags", forecast.lags, "lags per column in the forecasting design"),
        INT_FIELD("forest.trees", forecast.forest.n_trees, "trees"),
        INT_FIELD("forest.mtry", forecast.forest.mtry, "features tried per split, 0 = ceil(F/3)"),
        INT_FIELD("forest.min_node_size", forecast.forest.min_node_size, "nodes this small are not split"),
        Field{"forest.block_length", "moving-block length, weeks",
              [](RunConfig& c, const std::string& v) { c.forecast.forest.block_length = parse_integer<Eigen::Index>(v); },
              [](const RunConfig& c) { return std::to_string(c.forecast.forest.block_length); }},

        INT_FIELD("diagnostics.lags", diagnostics.lags, "portmanteau and ARCH-LM lags"),
        INT_FIELD("diagnostics.replicates", diagnostics.n_replicates, "bootstrap replicates"),
    };
    return table;
}

#undef INT_FIELD
#undef REAL_FIELD
#undef BOOL_FIELD

void write(const fs::path& path, std::string_view content, std::vector<fs::path>* written = nullptr) {
    fs::create_directories(path.parent_path());
    csv::write_atomic(path, content);
    if (written) written->push_back(path);
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

void require_column(const PanelDataset& panel, const std::string& name) {
    if (!panel.has(name)) fail(ErrorKind::Lookup, "unknown column '" + name + "'");
}

PanelDataset training_rows(const PanelDataset& panel, const SplitSpec& split) {
    if (panel.length() < split.train_length)
        fail(ErrorKind::Split, "panel has " + std::to_string(panel.length()) + " weeks, training needs " +
                                   std::to_string(split.train_length));
    return panel.slice(0, split.train_length);
}

ojson metric_json(const MetricReport& r) {
    return {{"mape", r.mape}, {"rmse", r.rmse}, {"rsr", r.rsr}, {"r2", r.r2},
            {"mase", r.mase}, {"seasonal_lag", r.seasonal_lag}, {"train_mean", r.train_mean}};
}

ojson trend_json(const TrendModel& m) {
    ojson cps = ojson::array();
    for (std::size_t j = 0; j < m.changepoints.size(); ++j)
        cps.push_back({{"week", m.changepoints[j]},
                       {"rate_adjustment", m.rate_adjustments[j]},
                       {"offset_correction", m.offset_corrections[j]}});
    ojson harmonics = ojson::array();
    for (Eigen::Index n = 0; n < m.cos_coeffs.size(); ++n)
        harmonics.push_back({{"harmonic", n + 1}, {"cos", m.cos_coeffs(n)}, {"sin", m.sin_coeffs(n)}});
    return {{"base_rate", m.base_rate},
            {"base_offset", m.base_offset},
            {"period", m.period},
            {"noise_sigma", m.noise_sigma},
            {"changepoint_penalty", m.changepoint_penalty},
            {"n_train", m.n_train},
            {"seasonality_identifiable", m.seasonality_identifiable},
            {"changepoints", cps},
            {"harmonics", harmonics}};
}

ojson diagnostic_json(const DiagnosticResult& r) {
    return {{"statistic", r.statistic}, {"p_value", r.p_value}, {"lags", r.lags}, {"equation_p_values", r.equation_p_values}};
}

std::string gc_file_name(const std::string& cause, const std::string& effect, const std::optional<std::string>& cond) {
    return "gc_" + cause + "_to_" + effect + (cond ? "_given_" + *cond : "") + ".csv";
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
    KeyValueConfig out;
    std::vector<std::string> problems;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    for (int line_no = 1; std::getline(in, raw); ++line_no) {
        const auto hash = raw.find_first_of("#;");
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                problems.push_back("line " + std::to_string(line_no) + ": malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            problems.push_back("line " + std::to_string(line_no) + ": empty key");
            continue;
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (out.entries_.contains(full)) problems.push_back("line " + std::to_string(line_no) + ": duplicate key '" + full + "'");
        out.entries_[full] = trim(line.substr(eq + 1));
    }
    if (!problems.empty()) fail(ErrorKind::Config, "invalid config file: " + join(problems, "; "));
    return out;
}

KeyValueConfig KeyValueConfig::read(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Ingestion, "cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

RunConfig run_config_from(const KeyValueConfig& kv, RunConfig base) {
    std::vector<std::string> problems;
    for (const auto& [key, value] : kv.entries()) {
        const auto& table = fields();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
        if (it == table.end()) {
            problems.push_back("unknown key '" + key + "'");
            continue;
        }
        try {
            it->set(base, value);
        } catch (const Error& e) {
            problems.push_back(key + ": " + e.what());
        }
    }
    if (!problems.empty()) fail(ErrorKind::Config, "invalid config: " + join(problems, "; "));
    return base;
}

std::string run_config_text(const RunConfig& cfg) {
    std::string out, section;
    for (const auto& f : fields()) {
        const std::string key = f.key;
        // results never depend on the worker count, and leaving it out keeps logs identical across machines
        if (key == "run.threads") continue;
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            out += (section.empty() ? "" : "\n") + std::string("[") + sec + "]\n";
            section = sec;
        }
        out += key.substr(dot + 1) + " = " + f.get(cfg) + "\n";
    }
    return out;
}

std::string config_reference() {
    const RunConfig defaults;
    std::string out = "Config file: `key = value` lines under [section] headers, # starts a comment.\n";
    for (const auto& f : fields()) {
        const std::string def = f.get(defaults);
        out += "  " + std::string(f.key) + "  " + f.help + (def.empty() ? "" : " (default " + def + ")") + "\n";
    }
    return out;
}

void RunConfig::validate() const {
    std::vector<std::string> problems;
    auto check = [&](const char* section, auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            std::string msg = e.what();
            while (!msg.empty() && (msg.back() == ';' || msg.back() == ' ')) msg.pop_back();
            problems.push_back("[" + std::string(section) + "] " + msg);
        }
    };
    if (target.empty()) problems.emplace_back("data.target must be set");
    if (temperature.empty()) problems.emplace_back("data.temperature must be set");
    if (!target.empty() && target == temperature) problems.emplace_back("data.target and data.temperature must differ");
    check("synth", [&] { synth.validate(); });
    if (daily_regions < 1) problems.emplace_back("synth.regions must be >= 1");
    check("features", [&] { features.validate(); });
    check("gc", [&] { hp.validate(); });
    check("gc", [&] { gc.validate(); });
    if (select_lags < 1) problems.emplace_back("select.lags must be >= 1");
    if (forecast.lags < 1) problems.emplace_back("forest.lags must be >= 1");
    check("split", [&] { split.validate(); });
    check("select", [&] { select_forest.validate(split.train_length - select_lags); });
    check("forest", [&] { forecast.forest.validate(split.train_length - forecast.lags); });
    if (lasso_order < 1) problems.emplace_back("lasso.order must be >= 1");
    if (lasso_grid < 2) problems.emplace_back("lasso.grid_size must be >= 2");
    if (lasso_cv_step < 1) problems.emplace_back("lasso.cv_step must be >= 1");
    check("trend", [&] { forecast.trend.validate(); });
    if (forecast.varx_order < 0) problems.emplace_back("varx.order must be >= 0");
    if (forecast.varx_max_order < 1) problems.emplace_back("varx.max_order must be >= 1");
    if (forecast.varx_replicates != 0 && forecast.varx_replicates < 100)
        problems.emplace_back("varx.replicates must be 0 or >= 100");
    if (!(forecast.varx_level > 0.0 && forecast.varx_level < 1.0)) problems.emplace_back("varx.level must lie in (0, 1)");
    if (!(forecast.varx_shrink > 0.0 && forecast.varx_shrink < 1.0)) problems.emplace_back("varx.shrink must lie in (0, 1)");
    if (irf_horizon < 1) problems.emplace_back("varx.irf_horizon must be >= 1");
    check("diagnostics", [&] { diagnostics.validate(split.train_length - std::max(1, forecast.varx_max_order)); });
    if (!problems.empty()) fail(ErrorKind::Config, "invalid run config: " + join(problems, "; "));
}

ForecastSetup RunConfig::forecast_setup() const {
    ForecastSetup s = forecast;
    s.target = target;
    s.temperature = temperature;
    s.seed = substream(seed, "forecast");
    return s;
}

std::string model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Trend: return "trend";
        case ModelKind::Varx: return "varx";
        case ModelKind::VarxNoTemperature: return "varx_no_temperature";
        case ModelKind::Forest: return "forest";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    for (auto k : {ModelKind::Trend, ModelKind::Varx, ModelKind::VarxNoTemperature, ModelKind::Forest})
        if (model_name(k) == name) return k;
    fail(ErrorKind::Config, "unknown model '" + std::string(name) + "' (trend, varx, varx_no_temperature, forest)");
}

std::string error_json(std::string_view kind, std::string_view message) {
    return ojson{{"error", {{"kind", kind}, {"message", message}}}}.dump();
}

// ---------------------------------------------------------------------------
// Forecast files

std::string forecast_csv(const ForecastFile& f) {
    std::string out = "week_start,model,forecast\n";
    for (Eigen::Index i = 0; i < f.values.size(); ++i)
        out += format_iso_date(f.week_starts[static_cast<std::size_t>(i)]) + "," + f.model + "," +
               csv::format_number(f.values(i)) + "\n";
    return out;
}

ForecastFile read_forecast_csv(const fs::path& path) {
    const auto table = csv::read(path);
    if (table.header != std::vector<std::string>{"week_start", "model", "forecast"})
        fail(ErrorKind::Ingestion, path.string() + ": expected header week_start,model,forecast");
    require(!table.rows.empty(), ErrorKind::EmptyInput, path.string() + ": no forecast rows");
    ForecastFile f;
    f.values.resize(static_cast<Eigen::Index>(table.rows.size()));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row.size() != 3) fail(ErrorKind::Ingestion, path.string() + ": line " + std::to_string(table.line_numbers[i]) + " needs 3 fields");
        f.week_starts.push_back(parse_iso_date(row[0]));
        if (i == 0) f.model = row[1];
        else if (row[1] != f.model) fail(ErrorKind::Ingestion, path.string() + ": mixes models '" + f.model + "' and '" + row[1] + "'");
        f.values(static_cast<Eigen::Index>(i)) = csv::parse_number(row[2], table.line_numbers[i], "forecast");
    }
    return f;
}

// ---------------------------------------------------------------------------
// Commands

std::vector<fs::path> cmd_synth(const RunConfig& cfg, const fs::path& out_dir, bool with_daily) {
    cfg.validate();
    SynthConfig sc = cfg.synth;
    sc.seed = substream(cfg.seed, "synth");
    const PanelDataset panel = generate_synthetic_panel(sc);
    std::vector<fs::path> written;
    write(out_dir / "panel.csv", serialize_panel_csv(panel), &written);
    if (with_daily) {
        const auto records = synthetic_daily_records(panel, cfg.daily_regions, substream(cfg.seed, "daily"));
        write(out_dir / "daily.csv", serialize_daily_csv(records), &written);
    }
    return written;
}

PanelDataset cmd_features(const fs::path& daily_csv, const std::optional<fs::path>& demand_panel, const RunConfig& cfg,
                          const fs::path& out_dir) {
    cfg.validate();
    const auto records = ingest_daily_csv(daily_csv);
    const PanelDataset climate = aggregate_weekly_national(records, cfg.features);
    PanelDataset out = climate;
    if (demand_panel) {
        const std::vector<std::string> need{cfg.target};
        const PanelDataset demand = ingest_panel_csv(*demand_panel, need);
        if (demand.week_starts() != climate.week_starts())
            fail(ErrorKind::Alignment, "demand panel and daily records cover different weeks");
        out = PanelDataset(climate.week_starts());
        out.set(cfg.target, demand.column(cfg.target));
        for (const auto& name : climate.names()) out.set(name, climate.column(name));
    }
    out.validate();
    write(out_dir / "features.csv", serialize_panel_csv(out));
    return out;
}

SpectrumResult cmd_gc(const PanelDataset& panel, const std::string& cause, const std::string& effect,
                      const std::optional<std::string>& conditioning, const RunConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    require_column(panel, cause);
    require_column(panel, effect);
    if (conditioning) require_column(panel, *conditioning);
    auto prepared = [&](const std::string& name) {
        return cfg.gc_hp_cycle ? hp_cycle(panel.column(name), cfg.hp) : panel.column(name);
    };
    GcBootstrapConfig gc = cfg.gc;
    gc.seed = substream(cfg.seed, "gc:" + cause + ">" + effect + (conditioning ? "|" + *conditioning : ""));
    SpectrumResult r = conditioning ? conditional_gc_spectrum(prepared(cause), prepared(effect), prepared(*conditioning), gc)
                                    : unconditional_gc_spectrum(prepared(cause), prepared(effect), gc);
    write(out_dir / gc_file_name(cause, effect, conditioning), r.to_csv());
    return r;
}

SelectResult cmd_select(const PanelDataset& panel, const RunConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    require_column(panel, cfg.target);
    const PanelDataset train = training_rows(panel, cfg.split);
    const SupervisedDataset data = lagged_design_matrix(train, cfg.target, cfg.select_lags);
    ForestConfig fc = cfg.select_forest;
    fc.seed = substream(cfg.seed, "select");
    const ForestModel forest = train_forest(data, fc);
    SelectResult r{impurity_importance(forest), oob_metrics(forest, data)};
    write(out_dir / "importance.csv", importance_csv(r.ranking));
    write(out_dir / "oob.json", oob_json(r.oob));
    return r;
}

SparseVarModel cmd_sparse_var(const PanelDataset& panel, const RunConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    require_column(panel, cfg.target);
    const PanelDataset train = training_rows(panel, cfg.split);
    std::vector<std::string> names{cfg.target};
    for (const auto& n : train.names())
        if (n != cfg.target) names.push_back(n);
    const Eigen::MatrixXd data = train.matrix(names);
    const double lambda_max = lasso_lambda_max(data, cfg.lasso_order);
    std::vector<double> grid;
    for (int i = 0; i < cfg.lasso_grid; ++i)
        grid.push_back(lambda_max * std::pow(10.0, -3.0 * i / (cfg.lasso_grid - 1)));
    LambdaSelection scheme;
    scheme.step = cfg.lasso_cv_step;
    scheme.target = 0;
    const double lambda = select_lambda(data, cfg.lasso_order, grid, scheme);
    SparseVarModel model = fit_lasso_var(data, cfg.lasso_order, lambda, true, names);
    write(out_dir / "sparse_var_coefficients.csv", coefficient_table_csv(coefficient_table(model, cfg.target)));
    write(out_dir / "sparse_var.json", dump({{"order", model.order},
                                             {"lambda", lambda},
                                             {"lambda_max", lambda_max},
                                             {"support_size", model.support().size()},
                                             {"duality_gaps", model.duality_gaps}}));
    return model;
}

FitResult cmd_fit_forecast(const PanelDataset& panel, ModelKind kind, const RunConfig& cfg, const fs::path& out_dir,
                           bool reports) {
    cfg.validate();
    require_column(panel, cfg.target);
    if (kind != ModelKind::Trend) require_column(panel, cfg.temperature);
    const PanelDataset train = training_rows(panel, cfg.split);
    const ForecastSetup setup = cfg.forecast_setup();
    const Eigen::Index h = cfg.split.horizon;
    const std::string name = model_name(kind);

    FitResult out;
    out.forecast.model = name;
    out.forecast.week_starts = following_weeks(train.week_starts().back(), h);
    auto report = [&](const std::string& file, std::string_view content) {
        if (reports) write(out_dir / (name + "_" + file), content, &out.written);
    };

    switch (kind) {
        case ModelKind::Trend: {
            const TrendModel model = fit_trend_model(train.column(cfg.target), setup.trend);
            out.forecast.values = forecast(model, h);
            report("model.json", dump(trend_json(model)));
            break;
        }
        case ModelKind::Varx:
        case ModelKind::VarxNoTemperature: {
            const bool with_temperature = kind == ModelKind::Varx;
            const VarxRun run = forecast_varx(train, h, setup, with_temperature);
            out.forecast.values = run.forecast;
            if (!reports) break;
            const BootstrapInference* inf = run.inference ? &*run.inference : nullptr;
            ojson j{{"order", run.estimate.order},
                    {"variables", run.estimate.variable_names},
                    {"exogenous", run.estimate.exog_names},
                    {"bic", run.estimate.bic},
                    {"spectral_radius", run.estimate.spectral_radius},
                    {"forecast_model_spectral_radius", stability_check(run.model)},
                    {"bias_corrected", inf != nullptr && setup.varx_bias_correct},
                    {"shrink_applied", inf ? inf->shrink_applied : 1.0}};
            DiagnosticConfig dc = cfg.diagnostics;
            dc.seed = substream(cfg.seed, name + ":diagnostics");
            j["portmanteau"] = diagnostic_json(portmanteau_test(run.estimate.residuals, dc));
            j["arch_lm"] = diagnostic_json(arch_lm_test(run.estimate.residuals, dc));
            if (with_temperature && inf) {
                BootstrapConfig bc;
                bc.n_replicates = setup.varx_replicates;
                bc.level = setup.varx_level;
                bc.seed = substream(cfg.seed, name + ":granger");
                const Eigen::MatrixXd exog_train = run.exog.values.topRows(train.length());
                const auto g = granger_test_time_domain(run.estimate, run.endog, exog_train, cfg.temperature, cfg.target, bc);
                j["granger_temperature_to_target"] = {
                    {"statistic", g.statistic}, {"p_value", g.p_value}, {"df", g.df}, {"replicates", g.n_replicates}};
            }
            report("model.json", dump(j));
            if (inf) report("coefficients.csv", coefficient_report_csv(run.estimate, *inf));
            report("irf.csv", irf_csv(irf(run.estimate, cfg.irf_horizon, inf, setup.varx_level)));
            report("fevd.csv", fevd_csv(fevd(run.estimate, default_fevd_horizons(), inf, setup.varx_level)));
            break;
        }
        case ModelKind::Forest: {
            const ForestRun run = forecast_forest(train, h, setup);
            out.forecast.values = run.forecast;
            if (!reports) break;
            report("importance.csv", importance_csv(impurity_importance(run.model)));
            report("oob.json", oob_json(oob_metrics(run.model, run.data)));
            break;
        }
    }
    write(out_dir / ("forecast_" + name + ".csv"), forecast_csv(out.forecast), &out.written);
    return out;
}

EvaluateResult cmd_evaluate(const std::vector<fs::path>& forecast_files, const PanelDataset& panel, const RunConfig& cfg,
                            const fs::path& out_dir) {
    cfg.validate();
    require_column(panel, cfg.target);
    require(!forecast_files.empty(), ErrorKind::EmptyInput, "no forecast files given");
    const Eigen::VectorXd& y = panel.column(cfg.target);
    const auto& axis = panel.week_starts();
    EvaluateResult res;
    for (const auto& path : forecast_files) {
        const ForecastFile f = read_forecast_csv(path);
        for (const auto& [m, _] : res.reports)
            if (m == f.model) fail(ErrorKind::InvalidInput, "model '" + f.model + "' appears in more than one file");
        const auto first = std::find(axis.begin(), axis.end(), f.week_starts.front());
        if (first == axis.end())
            fail(ErrorKind::Coverage, f.model + ": forecast week " + format_iso_date(f.week_starts.front()) + " is not in the panel");
        const auto begin = static_cast<Eigen::Index>(first - axis.begin());
        const auto h = f.values.size();
        if (begin + h > panel.length())
            fail(ErrorKind::Coverage, f.model + ": forecast runs past the end of the panel");
        for (Eigen::Index i = 0; i < h; ++i)
            if (axis[static_cast<std::size_t>(begin + i)] != f.week_starts[static_cast<std::size_t>(i)])
                fail(ErrorKind::Alignment, f.model + ": forecast weeks are not consecutive panel weeks");
        res.reports.emplace_back(f.model, evaluate_forecast(y.segment(begin, h), f.values, y.head(begin), 52));
    }
    ojson metrics = ojson::array();
    for (const auto& [m, r] : res.reports) {
        ojson row{{"model", m}};
        row.update(metric_json(r));
        metrics.push_back(row);
    }
    write(out_dir / "metrics.json", dump(metrics));
    if (res.reports.size() >= 2) {
        res.table = compare_models(res.reports);
        write(out_dir / "comparison.csv", comparison_csv(res.table));
        write(out_dir / "comparison.json", comparison_json(res.table));
    }
    return res;
}

PipelineResult cmd_pipeline(const RunConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    PipelineResult res;
    write(out_dir / "run_config.ini", run_config_text(cfg), &res.written);

    const auto synth_files = cmd_synth(cfg, out_dir / "synth", true);
    res.written.insert(res.written.end(), synth_files.begin(), synth_files.end());
    const PanelDataset panel = cmd_features(out_dir / "synth" / "daily.csv", out_dir / "synth" / "panel.csv", cfg, out_dir);
    res.written.push_back(out_dir / "features.csv");

    const fs::path gc_dir = out_dir / "gc";
    std::vector<std::string> causes = cfg.gc_causes;
    if (causes.empty())
        for (const auto& n : panel.names())
            if (n != cfg.target) causes.push_back(n);
    auto run_gc = [&](const std::string& cause, const std::string& effect, const std::optional<std::string>& cond) {
        res.gc.push_back({cause, effect, cond.value_or(""), cmd_gc(panel, cause, effect, cond, cfg, gc_dir)});
        res.written.push_back(gc_dir / gc_file_name(cause, effect, cond));
    };
    for (const auto& c : causes) run_gc(c, cfg.target, std::nullopt);
    run_gc(cfg.target, cfg.temperature, std::nullopt);
    for (const auto& w : cfg.gc_conditioning) run_gc(cfg.temperature, cfg.target, w);
    std::string summary = "cause,effect,conditioning,var_order,n_frequencies,n_significant_alpha,n_significant_bonferroni,max_estimate,threshold_bonferroni\n";
    for (const auto& g : res.gc)
        summary += g.cause + "," + g.effect + "," + g.conditioning + "," + std::to_string(g.spectrum.var_order) + "," +
                   std::to_string(g.spectrum.estimate.size()) + "," + std::to_string(g.spectrum.n_significant_alpha()) + "," +
                   std::to_string(g.spectrum.n_significant_bonferroni()) + "," +
                   csv::format_number(g.spectrum.estimate.maxCoeff()) + "," +
                   csv::format_number(g.spectrum.threshold_bonferroni(0)) + "\n";
    write(gc_dir / "summary.csv", summary, &res.written);

    res.select = cmd_select(panel, cfg, out_dir / "select");
    res.written.push_back(out_dir / "select" / "importance.csv");
    res.written.push_back(out_dir / "select" / "oob.json");
    (void)cmd_sparse_var(panel, cfg, out_dir / "sparse_var");
    res.written.push_back(out_dir / "sparse_var" / "sparse_var_coefficients.csv");
    res.written.push_back(out_dir / "sparse_var" / "sparse_var.json");

    std::vector<fs::path> forecasts;
    for (auto kind : {ModelKind::Trend, ModelKind::Varx, ModelKind::VarxNoTemperature, ModelKind::Forest}) {
        const FitResult fit = cmd_fit_forecast(panel, kind, cfg, out_dir / "models");
        res.written.insert(res.written.end(), fit.written.begin(), fit.written.end());
        forecasts.push_back(out_dir / "models" / ("forecast_" + model_name(kind) + ".csv"));
    }
    res.evaluation = cmd_evaluate(forecasts, panel, cfg, out_dir / "evaluation");
    for (const char* f : {"metrics.json", "comparison.csv", "comparison.json"}) res.written.push_back(out_dir / "evaluation" / f);

    ojson gc_rows = ojson::array();
    for (const auto& g : res.gc)
        gc_rows.push_back({{"cause", g.cause},
                           {"effect", g.effect},
                           {"conditioning", g.conditioning},
                           {"n_significant_bonferroni", g.spectrum.n_significant_bonferroni()},
                           {"n_frequencies", g.spectrum.estimate.size()}});
    ojson top = ojson::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(5, res.select.ranking.size()); ++i)
        top.push_back({{"feature", res.select.ranking[i].first}, {"score", res.select.ranking[i].second}});
    ojson models = ojson::object();
    for (const auto& [m, r] : res.evaluation.reports) models[m] = metric_json(r);
    write(out_dir / "summary.json", dump({{"seed", cfg.seed}, {"gc", gc_rows}, {"top_features", top}, {"models", models}}),
          &res.written);
    return res;
}

}  // namespace climdem
