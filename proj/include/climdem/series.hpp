#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "climdem/calendar.hpp"
#include "climdem/error.hpp"

namespace climdem {

/// One region-day of climate observations, already in physical units.
struct RegionalDailyRecord {
    std::string region_id;
    Date date;
    double temp = 0.0;               ///< degrees C
    double u10 = 0.0;                ///< m/s eastward
    double v10 = 0.0;                ///< m/s northward
    double precip = 0.0;             ///< mm/day
    double specific_humidity = 0.0;  ///< g/kg
    double cloud_cover = 0.0;        ///< fraction
    double fwi = 0.0;
};

/// Weekly series on a gap-free Monday axis.
struct WeeklySeries {
    std::string name;
    std::string unit;
    std::vector<Date> week_starts;
    Eigen::VectorXd values;

    [[nodiscard]] Eigen::Index size() const noexcept { return values.size(); }
    void validate() const;
};

/// Aligned weekly panel: one shared time axis, uniquely named columns kept in insertion order.
class PanelDataset {
public:
    PanelDataset() = default;
    explicit PanelDataset(std::vector<Date> week_starts);

    [[nodiscard]] Eigen::Index length() const noexcept { return static_cast<Eigen::Index>(week_starts_.size()); }
    [[nodiscard]] const std::vector<Date>& week_starts() const noexcept { return week_starts_; }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }

    [[nodiscard]] bool has(std::string_view name) const noexcept;
    [[nodiscard]] const Eigen::VectorXd& column(std::string_view name) const;
    [[nodiscard]] WeeklySeries series(std::string_view name) const;

    /// Adds or replaces a column. Length must match the time axis.
    void set(const std::string& name, Eigen::VectorXd values);

    /// Columns as a T x K matrix in the given order.
    [[nodiscard]] Eigen::MatrixXd matrix(std::span<const std::string> names) const;

    /// Rows [begin, end).
    [[nodiscard]] PanelDataset slice(Eigen::Index begin, Eigen::Index end) const;

    void validate() const;

    friend bool operator==(const PanelDataset&, const PanelDataset&) = default;

private:
    std::vector<Date> week_starts_;
    std::vector<std::string> names_;
    std::vector<Eigen::VectorXd> columns_;
};

/// Names of the ten national weekly variables.
namespace columns {
inline constexpr const char* drug_demand = "drug_demand";
inline constexpr const char* temperature = "temperature";
inline constexpr const char* wind_speed = "wind_speed";
inline constexpr const char* cloud_cover = "cloud_cover";
inline constexpr const char* specific_humidity = "specific_humidity";
inline constexpr const char* precipitation = "precipitation";
inline constexpr const char* fwi = "fwi";
inline constexpr const char* temperature_sd = "temperature_sd";
inline constexpr const char* extreme_rainfall = "extreme_rainfall";
inline constexpr const char* wet_days = "wet_days";
}  // namespace columns

struct FeatureConfig {
    double wet_day_threshold_mm = 1.0;
    double extreme_quantile = 0.999;
    void validate() const;
};

struct HpConfig {
    double lambda = 1600.0 * 13.0 * 13.0 * 13.0 * 13.0;  // 1600 * (52/4)^4
    void validate() const;
};

template <typename Scalar>
[[nodiscard]] Scalar derive_wind_speed(Scalar u, Scalar v) {
    require(std::isfinite(u) && std::isfinite(v), ErrorKind::InvalidInput, "wind components must be finite");
    return std::hypot(u, v);
}

/// Days with precipitation strictly above the threshold.
[[nodiscard]] int weekly_wet_days(std::span<const double> daily_precip, const FeatureConfig& cfg = {});

/// Total precipitation of days strictly above p_extreme.
[[nodiscard]] double weekly_extreme_rainfall(std::span<const double> daily_precip, double p_extreme);

/// Population (divisor 7) standard deviation of the week's daily temperatures.
[[nodiscard]] double weekly_temperature_sd(std::span<const double> daily_temp);

/// Regional daily records to the national weekly panel (all columns but drug_demand).
[[nodiscard]] PanelDataset aggregate_weekly_national(std::span<const RegionalDailyRecord> records,
                                                     const FeatureConfig& cfg = {});

/// Cycle component y - trend of the Hodrick-Prescott filter.
[[nodiscard]] Eigen::VectorXd hp_cycle(const Eigen::VectorXd& y, const HpConfig& cfg = {});
[[nodiscard]] WeeklySeries hp_cycle(const WeeklySeries& series, const HpConfig& cfg = {});

// File formats.
inline constexpr const char* daily_csv_header =
    "region_id,date,temp_c,u10_ms,v10_ms,precip_mm,spec_humidity_gkg,cloud_cover,fwi";

[[nodiscard]] std::vector<RegionalDailyRecord> ingest_daily_csv(const std::filesystem::path& path);
[[nodiscard]] std::vector<RegionalDailyRecord> parse_daily_csv(std::string_view text);

/// `required` lists columns that must be present; empty means accept any.
[[nodiscard]] PanelDataset ingest_panel_csv(const std::filesystem::path& path,
                                            std::span<const std::string> required = {});
[[nodiscard]] PanelDataset parse_panel_csv(std::string_view text, std::span<const std::string> required = {});
[[nodiscard]] std::string serialize_panel_csv(const PanelDataset& panel);
[[nodiscard]] std::string serialize_daily_csv(std::span<const RegionalDailyRecord> records);

}  // namespace climdem
