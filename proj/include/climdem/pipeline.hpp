#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "climdem/diagnostics.hpp"
#include "climdem/metrics.hpp"
#include "climdem/series.hpp"
#include "climdem/sparse_var.hpp"
#include "climdem/spectral_gc.hpp"
#include "climdem/synth.hpp"
#include "climdem/workflow.hpp"

namespace climdem {

/// Flat `key = value` text grouped under `[section]` headers. Keys are addressed as
/// `section.key`; `#` and `;` start comments.
class KeyValueConfig {
public:
    [[nodiscard]] static KeyValueConfig parse(std::string_view text);
    [[nodiscard]] static KeyValueConfig read(const std::filesystem::path& path);

    void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
    [[nodiscard]] const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

/// Everything one run needs. All randomness derives from `seed` through named substreams.
struct RunConfig {
    std::uint64_t seed = 42;
    std::size_t threads = 0;
    std::string target = columns::drug_demand;
    std::string temperature = columns::temperature;

    SynthConfig synth;
    int daily_regions = 3;
    FeatureConfig features;

    bool gc_hp_cycle = true;
    HpConfig hp;
    GcBootstrapConfig gc;
    std::vector<std::string> gc_causes;        ///< empty: every climate column of the panel
    std::vector<std::string> gc_conditioning;  ///< conditional spectra of temperature -> target

    int select_lags = 4;
    ForestConfig select_forest;

    int lasso_order = 4;
    int lasso_grid = 20;
    int lasso_cv_step = 4;

    SplitSpec split;
    ForecastSetup forecast;  ///< its target, temperature and seed are overwritten from the fields above
    int irf_horizon = 26;
    DiagnosticConfig diagnostics;

    /// Lists every violated field in one Config error.
    void validate() const;
    /// Forecast settings with target, temperature and seed filled in.
    [[nodiscard]] ForecastSetup forecast_setup() const;
};

/// Applies `kv` over the defaults. Unknown keys and unparsable values are reported together.
[[nodiscard]] RunConfig run_config_from(const KeyValueConfig& kv, RunConfig base = {});
/// The effective configuration in the same format, so a run can be replayed from its output.
[[nodiscard]] std::string run_config_text(const RunConfig& cfg);
/// Key reference for `--help`.
[[nodiscard]] std::string config_reference();

enum class ModelKind { Trend, Varx, VarxNoTemperature, Forest };
[[nodiscard]] std::string model_name(ModelKind kind);
[[nodiscard]] ModelKind parse_model_kind(std::string_view name);

/// Forecast file: `week_start,model,forecast`.
struct ForecastFile {
    std::string model;
    std::vector<Date> week_starts;
    Eigen::VectorXd values;
};
[[nodiscard]] std::string forecast_csv(const ForecastFile& f);
[[nodiscard]] ForecastFile read_forecast_csv(const std::filesystem::path& path);

struct SelectResult {
    std::vector<std::pair<std::string, double>> ranking;
    OobReport oob;
};

struct FitResult {
    ForecastFile forecast;
    std::vector<std::filesystem::path> written;
};

struct EvaluateResult {
    std::vector<std::pair<std::string, MetricReport>> reports;
    std::vector<ComparisonRow> table;
};

struct GcSummaryRow {
    std::string cause, effect, conditioning;
    SpectrumResult spectrum;
};

struct PipelineResult {
    std::vector<GcSummaryRow> gc;
    SelectResult select;
    EvaluateResult evaluation;
    std::vector<std::filesystem::path> written;
};

// Commands. Every file is written atomically under `out_dir`.
std::vector<std::filesystem::path> cmd_synth(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                             bool with_daily = true);
/// Aggregates daily records; `demand_panel`, when given, contributes the target column.
PanelDataset cmd_features(const std::filesystem::path& daily_csv, const std::optional<std::filesystem::path>& demand_panel,
                          const RunConfig& cfg, const std::filesystem::path& out_dir);
SpectrumResult cmd_gc(const PanelDataset& panel, const std::string& cause, const std::string& effect,
                      const std::optional<std::string>& conditioning, const RunConfig& cfg,
                      const std::filesystem::path& out_dir);
SelectResult cmd_select(const PanelDataset& panel, const RunConfig& cfg, const std::filesystem::path& out_dir);
/// Sparse VAR on the target and the climate columns; writes the target equation's coefficient table.
SparseVarModel cmd_sparse_var(const PanelDataset& panel, const RunConfig& cfg, const std::filesystem::path& out_dir);
/// Trains on the first `split.train_length` rows and forecasts `split.horizon` weeks.
/// `reports` adds the model's fit reports next to the forecast file.
FitResult cmd_fit_forecast(const PanelDataset& panel, ModelKind model, const RunConfig& cfg,
                           const std::filesystem::path& out_dir, bool reports = true);
EvaluateResult cmd_evaluate(const std::vector<std::filesystem::path>& forecast_files, const PanelDataset& panel,
                            const RunConfig& cfg, const std::filesystem::path& out_dir);
/// synth -> features -> gc -> select -> fit all models -> evaluate.
PipelineResult cmd_pipeline(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// `{"error": {"kind": ..., "message": ...}}`
[[nodiscard]] std::string error_json(std::string_view kind, std::string_view message);

}  // namespace climdem
