#pragma once

#include <cstdint>
#include <vector>

#include "climdem/series.hpp"

namespace climdem {

struct LevelShift {
    Eigen::Index week = 0;  ///< first affected week (0-based)
    double shift = 0.0;
};

/// Synthetic national panel: seasonal temperature with AR(1) anomalies, demand driven by
/// its own lags and lagged temperature around a shifting level, other climate columns as
/// correlated noise in plausible units.
struct SynthConfig {
    Eigen::Index length = 390;
    Date start = Date{std::chrono::year{2016} / std::chrono::January / 4};
    double temperature_mean = 17.5;
    double temperature_amplitude = 8.0;
    double temperature_phase_weeks = 3.0;  ///< week of the coldest point
    double temperature_ar = 0.8;
    double temperature_noise_sd = 2.0;
    double demand_level = 300000.0;
    std::vector<double> demand_ar{0.3, 0.0, 0.0, 0.0};
    std::vector<double> temperature_effect{-3000.0, 0.0, 0.0, 0.0};  ///< per degree, lags 1..4
    double demand_seasonal_amplitude = 0.0;
    double holiday_effect = -20000.0;  ///< week containing August 15
    std::vector<LevelShift> level_shifts{{222, -45000.0}, {298, 34000.0}};
    double demand_noise_sd = 12000.0;
    std::uint64_t seed = 42;
    void validate() const;
};

[[nodiscard]] PanelDataset generate_synthetic_panel(const SynthConfig& cfg);

/// Regional daily climate records whose national weekly aggregation reproduces the panel's
/// temperature, humidity, cloud cover, wind speed, FWI and precipitation totals. Daily spread
/// within a week follows the panel's temperature_sd; wet days, extreme rainfall and the
/// temperature SD are left for the aggregation to recompute.
[[nodiscard]] std::vector<RegionalDailyRecord> synthetic_daily_records(const PanelDataset& panel, int n_regions,
                                                                       std::uint64_t seed);

}  // namespace climdem
