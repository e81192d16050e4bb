#include "climdem/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>
#include <string>

#include "climdem/random.hpp"

namespace climdem {

void SynthConfig::validate() const {
    std::vector<std::string> problems;
    if (length < 60) problems.emplace_back("length must be >= 60");
    if (!is_monday(start)) problems.emplace_back("start must be a Monday");
    if (temperature_noise_sd < 0.0) problems.emplace_back("temperature_noise_sd must be >= 0");
    if (demand_noise_sd < 0.0) problems.emplace_back("demand_noise_sd must be >= 0");
    if (std::abs(temperature_ar) >= 1.0) problems.emplace_back("temperature_ar must lie in (-1, 1)");
    if (demand_ar.size() != temperature_effect.size())
        problems.emplace_back("demand_ar and temperature_effect need the same number of lags");
    double ar_sum = 0.0;
    for (double a : demand_ar) ar_sum += std::abs(a);
    if (ar_sum >= 1.0) problems.emplace_back("sum of |demand_ar| must be < 1");
    for (const auto& s : level_shifts)
        if (s.week < 0 || s.week >= length) problems.emplace_back("level shift week " + std::to_string(s.week) + " outside the panel");
    if (!(demand_level > 0.0)) problems.emplace_back("demand_level must be > 0");
    if (!problems.empty()) {
        std::string msg = "invalid synthetic config:";
        for (const auto& p : problems) msg += " " + p + ";";
        fail(ErrorKind::Config, msg);
    }
}

PanelDataset generate_synthetic_panel(const SynthConfig& cfg) {
    cfg.validate();
    const Eigen::Index t = cfg.length;
    const auto lags = static_cast<Eigen::Index>(cfg.demand_ar.size());
    const Eigen::Index burn = 104;
    const Eigen::Index n = t + burn;
    Rng rng = make_rng(cfg.seed);
    NormalSampler normal;
    const double two_pi = 2.0 * std::numbers::pi;

    // Burn-in weeks precede the start date so the seasonal phase is anchored to week 0.
    Eigen::VectorXd season(n), temp(n), anomaly(n);
    double a = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = static_cast<double>(i - burn);
        season(i) = -std::cos(two_pi * (w - cfg.temperature_phase_weeks) / 52.0);
        a = cfg.temperature_ar * a + cfg.temperature_noise_sd * normal(rng);
        anomaly(i) = a;
        temp(i) = cfg.temperature_mean + cfg.temperature_amplitude * season(i) + a;
    }

    std::vector<Date> weeks;
    for (Eigen::Index i = 0; i < t; ++i) weeks.push_back(cfg.start + std::chrono::days{7 * i});

    // Demand fluctuates around a level that carries the holiday dip and the shifts.
    Eigen::VectorXd level = Eigen::VectorXd::Constant(n, cfg.demand_level);
    for (Eigen::Index i = burn; i < n; ++i) {
        const Date week = weeks[static_cast<std::size_t>(i - burn)];
        if (week_contains(week, std::chrono::August, std::chrono::day{15})) level(i) += cfg.holiday_effect;
        for (const auto& s : cfg.level_shifts)
            if (i - burn >= s.week) level(i) += s.shift;
        level(i) += cfg.demand_seasonal_amplitude * season(i);
    }
    Eigen::VectorXd dev = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = lags; i < n; ++i) {
        double v = cfg.demand_noise_sd * normal(rng);
        for (Eigen::Index l = 1; l <= lags; ++l) {
            v += cfg.demand_ar[static_cast<std::size_t>(l - 1)] * dev(i - l);
            v += cfg.temperature_effect[static_cast<std::size_t>(l - 1)] * (temp(i - l) - cfg.temperature_mean);
        }
        dev(i) = v;
    }
    const Eigen::VectorXd demand = level + dev;

    // Weather factor shared by the moisture-related columns.
    Eigen::VectorXd wind(t), cloud(t), humidity(t), precip(t), fwi(t), tsd(t), extreme(t), wet(t);
    double f = 0.0;
    for (Eigen::Index i = 0; i < t; ++i) {
        const Eigen::Index j = i + burn;
        f = 0.6 * f + 0.8 * normal(rng);
        const double wet_season = -season(j);
        wind(i) = std::max(0.5, 3.6 + 0.4 * wet_season + 0.5 * f + 0.4 * normal(rng));
        const double cloud_logit = -0.4 + 0.6 * wet_season + 0.7 * f + 0.3 * normal(rng);
        cloud(i) = 1.0 / (1.0 + std::exp(-cloud_logit));
        humidity(i) = std::max(2.0, 8.0 + 0.25 * (temp(j) - cfg.temperature_mean) + 0.5 * f + 0.6 * normal(rng));
        precip(i) = std::max(0.0, 12.0 + 9.0 * wet_season + 8.0 * f + 6.0 * normal(rng));
        wet(i) = std::clamp(std::round(precip(i) / 6.0 + 0.5 * normal(rng)), 0.0, 7.0);
        extreme(i) = precip(i) > 30.0 ? 0.3 * (precip(i) - 30.0) + std::abs(2.0 * normal(rng)) : 0.0;
        fwi(i) = std::max(0.0, 14.0 + 9.0 * season(j) - 3.0 * f + 4.0 * normal(rng));
        tsd(i) = std::max(0.3, 1.8 + 0.6 * std::abs(anomaly(j)) / std::max(cfg.temperature_noise_sd, 1e-9) * 0.5 +
                                   0.3 * normal(rng));
    }

    PanelDataset panel(weeks);
    panel.set(columns::drug_demand, demand.tail(t));
    panel.set(columns::temperature, temp.tail(t));
    panel.set(columns::wind_speed, wind);
    panel.set(columns::cloud_cover, cloud);
    panel.set(columns::specific_humidity, humidity);
    panel.set(columns::precipitation, precip);
    panel.set(columns::fwi, fwi);
    panel.set(columns::temperature_sd, tsd);
    panel.set(columns::extreme_rainfall, extreme);
    panel.set(columns::wet_days, wet);
    panel.validate();
    return panel;
}

namespace {

// Zero-sum deviations around `centre`, shrunk if needed so every value stays in [lo, hi].
std::vector<double> spread_around(double centre, double sd, std::size_t n, double lo, double hi, Rng& rng,
                                  NormalSampler& normal) {
    std::vector<double> d(n);
    for (auto& v : d) v = sd * normal(rng);
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    double scale = 1.0;
    for (auto& v : d) {
        v -= mean;
        if (v < 0.0 && centre + v < lo) scale = std::min(scale, 0.9 * (centre - lo) / -v);
        if (v > 0.0 && centre + v > hi) scale = std::min(scale, 0.9 * (hi - centre) / v);
    }
    for (auto& v : d) v = centre + scale * v;
    return d;
}

}  // namespace

std::vector<RegionalDailyRecord> synthetic_daily_records(const PanelDataset& panel, int n_regions, std::uint64_t seed) {
    require(n_regions >= 1, ErrorKind::Config, "n_regions must be >= 1");
    for (const char* c : {columns::temperature, columns::temperature_sd, columns::specific_humidity, columns::cloud_cover,
                          columns::wind_speed, columns::fwi, columns::precipitation})
        if (!panel.has(c)) fail(ErrorKind::Lookup, std::string("panel lacks column '") + c + "'");
    const auto regions = static_cast<std::size_t>(n_regions);
    const std::size_t cells = regions * 7;
    const double inf = std::numeric_limits<double>::infinity();
    Rng rng = make_rng(seed);
    NormalSampler normal;

    std::vector<RegionalDailyRecord> out(cells * static_cast<std::size_t>(panel.length()));
    for (Eigen::Index w = 0; w < panel.length(); ++w) {
        const auto& at = [&](const char* c) { return panel.column(c)(w); };
        const auto temp = spread_around(at(columns::temperature), at(columns::temperature_sd), cells, -inf, inf, rng, normal);
        const double hum_c = at(columns::specific_humidity), cloud_c = at(columns::cloud_cover);
        const double wind_c = at(columns::wind_speed), fwi_c = at(columns::fwi);
        const auto hum = spread_around(hum_c, 0.15 * hum_c, cells, 0.0, inf, rng, normal);
        const auto cloud = spread_around(cloud_c, 0.15, cells, 0.0, 1.0, rng, normal);
        const auto wind = spread_around(wind_c, 0.3 * wind_c, cells, 0.0, inf, rng, normal);
        const auto fwi = spread_around(fwi_c, 0.25 * fwi_c + 0.5, cells, 0.0, inf, rng, normal);
        // Weekly national rain total split over region-days, some of them dry.
        std::vector<double> share(cells, 0.0);
        double share_sum = 0.0;
        for (auto& s : share) {
            s = uniform01(rng) < 0.45 ? 0.0 : std::exp(normal(rng));
            share_sum += s;
        }
        if (share_sum == 0.0) {
            share[0] = 1.0;
            share_sum = 1.0;
        }
        const double rain = at(columns::precipitation);
        for (std::size_t r = 0; r < regions; ++r) {
            for (std::size_t d = 0; d < 7; ++d) {
                const std::size_t c = r * 7 + d;
                const double angle = 2.0 * std::numbers::pi * uniform01(rng);
                auto& rec = out[(r * static_cast<std::size_t>(panel.length()) + static_cast<std::size_t>(w)) * 7 + d];
                rec.region_id = "R" + std::to_string(r + 1);
                rec.date = panel.week_starts()[static_cast<std::size_t>(w)] + std::chrono::days{static_cast<int>(d)};
                rec.temp = temp[c];
                rec.u10 = wind[c] * std::cos(angle);
                rec.v10 = wind[c] * std::sin(angle);
                rec.precip = rain * share[c] / share_sum;
                rec.specific_humidity = hum[c];
                rec.cloud_cover = cloud[c];
                rec.fwi = fwi[c];
            }
        }
    }
    return out;
}

}  // namespace climdem
