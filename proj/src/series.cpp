#include "climdem/series.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "climdem/csv.hpp"
#include "climdem/linalg.hpp"

namespace climdem {

namespace {

void check_axis(const std::vector<Date>& axis, std::span<const std::size_t> lines = {}) {
    for (std::size_t i = 0; i < axis.size(); ++i) {
        const std::string where = lines.empty() ? "index " + std::to_string(i) : "row " + std::to_string(lines[i]);
        if (!is_monday(axis[i]))
            fail(ErrorKind::Ingestion, where + ": week start " + format_iso_date(axis[i]) + " is not a Monday");
        if (i > 0 && axis[i] - axis[i - 1] != std::chrono::days{7}) {
            fail(ErrorKind::Gap, where + ": gap in time axis, expected week " +
                                     format_iso_date(axis[i - 1] + std::chrono::days{7}) + " but found " +
                                     format_iso_date(axis[i]));
        }
    }
}

}  // namespace

void WeeklySeries::validate() const {
    require(static_cast<Eigen::Index>(week_starts.size()) == values.size(), ErrorKind::Shape,
            "series '" + name + "': axis and values differ in length");
    check_axis(week_starts);
    require(values.allFinite(), ErrorKind::InvalidInput, "series '" + name + "' has non-finite values");
}

PanelDataset::PanelDataset(std::vector<Date> week_starts) : week_starts_(std::move(week_starts)) {}

bool PanelDataset::has(std::string_view name) const noexcept {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const Eigen::VectorXd& PanelDataset::column(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) fail(ErrorKind::Lookup, "unknown column '" + std::string(name) + "'");
    return columns_[static_cast<std::size_t>(it - names_.begin())];
}

WeeklySeries PanelDataset::series(std::string_view name) const {
    return WeeklySeries{std::string(name), "", week_starts_, column(name)};
}

void PanelDataset::set(const std::string& name, Eigen::VectorXd values) {
    require(values.size() == length(), ErrorKind::Shape,
            "column '" + name + "' has length " + std::to_string(values.size()) + ", axis has " +
                std::to_string(length()));
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it != names_.end()) {
        columns_[static_cast<std::size_t>(it - names_.begin())] = std::move(values);
    } else {
        names_.push_back(name);
        columns_.push_back(std::move(values));
    }
}

Eigen::MatrixXd PanelDataset::matrix(std::span<const std::string> names) const {
    Eigen::MatrixXd m(length(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = column(names[j]);
    return m;
}

PanelDataset PanelDataset::slice(Eigen::Index begin, Eigen::Index end) const {
    require(0 <= begin && begin <= end && end <= length(), ErrorKind::Split, "slice out of range");
    PanelDataset out(std::vector<Date>(week_starts_.begin() + begin, week_starts_.begin() + end));
    for (std::size_t j = 0; j < names_.size(); ++j) out.set(names_[j], columns_[j].segment(begin, end - begin));
    return out;
}

void PanelDataset::validate() const {
    check_axis(week_starts_);
    for (std::size_t j = 0; j < names_.size(); ++j) {
        require(columns_[j].size() == length(), ErrorKind::Shape, "column '" + names_[j] + "' length mismatch");
        require(columns_[j].allFinite(), ErrorKind::InvalidInput, "column '" + names_[j] + "' has non-finite values");
        for (std::size_t k = j + 1; k < names_.size(); ++k)
            require(names_[j] != names_[k], ErrorKind::InvalidInput, "duplicate column '" + names_[j] + "'");
    }
}

void FeatureConfig::validate() const {
    require(wet_day_threshold_mm > 0.0, ErrorKind::Config, "wet_day_threshold_mm must be > 0");
    require(extreme_quantile > 0.0 && extreme_quantile < 1.0, ErrorKind::Config, "extreme_quantile must be in (0,1)");
}

void HpConfig::validate() const { require(lambda > 0.0, ErrorKind::Config, "HP lambda must be > 0"); }

int weekly_wet_days(std::span<const double> daily_precip, const FeatureConfig& cfg) {
    require(daily_precip.size() == 7, ErrorKind::Shape, "weekly_wet_days expects 7 daily values");
    int count = 0;
    for (double p : daily_precip) {
        require(p >= 0.0, ErrorKind::InvalidInput, "precipitation must be >= 0");
        if (p - cfg.wet_day_threshold_mm > 0.0) ++count;  // H(0) = 0
    }
    return count;
}

double weekly_extreme_rainfall(std::span<const double> daily_precip, double p_extreme) {
    require(daily_precip.size() == 7, ErrorKind::Shape, "weekly_extreme_rainfall expects 7 daily values");
    require(p_extreme >= 0.0, ErrorKind::InvalidInput, "extreme-precipitation threshold must be >= 0");
    double total = 0.0;
    for (double p : daily_precip) {
        require(p >= 0.0, ErrorKind::InvalidInput, "precipitation must be >= 0");
        if (p > p_extreme) total += p;
    }
    return total;
}

double weekly_temperature_sd(std::span<const double> daily_temp) {
    require(daily_temp.size() == 7, ErrorKind::Shape, "weekly_temperature_sd expects 7 daily values");
    const double mu = std::accumulate(daily_temp.begin(), daily_temp.end(), 0.0) / 7.0;
    double ss = 0.0;
    for (double t : daily_temp) ss += (t - mu) * (t - mu);
    return std::sqrt(ss / 7.0);
}

PanelDataset aggregate_weekly_national(std::span<const RegionalDailyRecord> records, const FeatureConfig& cfg) {
    cfg.validate();
    require(!records.empty(), ErrorKind::EmptyInput, "no daily records");

    std::map<std::string, std::vector<const RegionalDailyRecord*>> by_region;
    for (const auto& r : records) by_region[r.region_id].push_back(&r);
    for (auto& [region, rows] : by_region)
        std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->date < b->date; });

    const auto& first = by_region.begin()->second;
    const Date start = first.front()->date;
    const std::size_t n_days = first.size();
    require(is_monday(start), ErrorKind::Alignment, "daily coverage must start on a Monday, starts " +
                                                        format_iso_date(start));
    require(n_days % 7 == 0, ErrorKind::Alignment, "daily coverage must consist of whole weeks");
    for (const auto& [region, rows] : by_region) {
        require(rows.size() == n_days && rows.front()->date == start, ErrorKind::Alignment,
                "region '" + region + "' covers a different span than region '" + by_region.begin()->first + "'");
        for (std::size_t d = 0; d < rows.size(); ++d) {
            if (rows[d]->date != start + std::chrono::days{static_cast<int>(d)})
                fail(ErrorKind::Alignment, "region '" + region + "': missing or duplicate day near " +
                                               format_iso_date(rows[d]->date));
        }
    }

    const auto n_weeks = static_cast<Eigen::Index>(n_days / 7);
    const auto n_regions = static_cast<double>(by_region.size());
    auto zeros = [&] { return Eigen::VectorXd::Zero(n_weeks).eval(); };
    Eigen::VectorXd temp = zeros(), wind = zeros(), cloud = zeros(), hum = zeros(), fwi = zeros(), wet = zeros(),
                    tsd = zeros(), precip = zeros(), extreme = zeros();

    for (const auto& [region, rows] : by_region) {
        std::vector<double> history;
        history.reserve(rows.size());
        for (const auto* r : rows) history.push_back(r->precip);
        const double p_extreme = quantile(history, cfg.extreme_quantile);
        for (Eigen::Index w = 0; w < n_weeks; ++w) {
            std::array<double, 7> p{}, t{};
            double wind_sum = 0.0, cloud_sum = 0.0, hum_sum = 0.0, fwi_sum = 0.0;
            for (int d = 0; d < 7; ++d) {
                const auto& r = *rows[static_cast<std::size_t>(w * 7 + d)];
                require(r.precip >= 0.0 && r.fwi >= 0.0 && r.cloud_cover >= 0.0 && r.cloud_cover <= 1.0,
                        ErrorKind::InvalidInput,
                        "region '" + region + "' " + format_iso_date(r.date) + ": value out of physical range");
                p[static_cast<std::size_t>(d)] = r.precip;
                t[static_cast<std::size_t>(d)] = r.temp;
                wind_sum += derive_wind_speed(r.u10, r.v10);
                cloud_sum += r.cloud_cover;
                hum_sum += r.specific_humidity;
                fwi_sum += r.fwi;
            }
            const double week_temp = std::accumulate(t.begin(), t.end(), 0.0) / 7.0;
            temp(w) += week_temp / n_regions;
            wind(w) += wind_sum / 7.0 / n_regions;
            cloud(w) += cloud_sum / 7.0 / n_regions;
            hum(w) += hum_sum / 7.0 / n_regions;
            fwi(w) += fwi_sum / 7.0 / n_regions;
            wet(w) += weekly_wet_days(p, cfg) / n_regions;
            tsd(w) += weekly_temperature_sd(t) / n_regions;
            precip(w) += std::accumulate(p.begin(), p.end(), 0.0);
            extreme(w) += weekly_extreme_rainfall(p, p_extreme);
        }
    }

    std::vector<Date> axis;
    axis.reserve(static_cast<std::size_t>(n_weeks));
    for (Eigen::Index w = 0; w < n_weeks; ++w) axis.push_back(start + std::chrono::days{7 * static_cast<int>(w)});
    PanelDataset panel(std::move(axis));
    panel.set(columns::temperature, temp);
    panel.set(columns::wind_speed, wind);
    panel.set(columns::cloud_cover, cloud);
    panel.set(columns::specific_humidity, hum);
    panel.set(columns::precipitation, precip);
    panel.set(columns::fwi, fwi);
    panel.set(columns::temperature_sd, tsd);
    panel.set(columns::extreme_rainfall, extreme);
    panel.set(columns::wet_days, wet);
    return panel;
}

// ---------------------------------------------------------------------------
// CSV

std::vector<RegionalDailyRecord> parse_daily_csv(std::string_view text) {
    const auto table = csv::parse(text);
    static const std::vector<std::string> expected = {"region_id", "date", "temp_c", "u10_ms", "v10_ms",
                                                      "precip_mm", "spec_humidity_gkg", "cloud_cover", "fwi"};
    for (const auto& name : expected) {
        if (std::find(table.header.begin(), table.header.end(), name) == table.header.end())
            fail(ErrorKind::Ingestion, "daily CSV: missing column '" + name + "'");
    }
    auto index_of = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(table.header.begin(), table.header.end(), name) -
                                        table.header.begin());
    };
    std::array<std::size_t, 9> idx{};
    for (std::size_t k = 0; k < expected.size(); ++k) idx[k] = index_of(expected[k]);
    if (table.rows.empty()) fail(ErrorKind::EmptyInput, "daily CSV has a header but no rows");

    std::vector<RegionalDailyRecord> out;
    out.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::size_t line = table.line_numbers[i];
        auto num = [&](std::size_t k) { return csv::parse_number(row[idx[k]], line, expected[k]); };
        RegionalDailyRecord r;
        r.region_id = row[idx[0]];
        require(!r.region_id.empty(), ErrorKind::Ingestion, "row " + std::to_string(line) + ": empty region_id");
        try {
            r.date = parse_iso_date(row[idx[1]]);
        } catch (const Error& e) {
            fail(ErrorKind::Ingestion, "row " + std::to_string(line) + ": " + e.what());
        }
        r.temp = num(2);
        r.u10 = num(3);
        r.v10 = num(4);
        r.precip = num(5);
        r.specific_humidity = num(6);
        r.cloud_cover = num(7);
        r.fwi = num(8);
        if (r.precip < 0.0 || r.fwi < 0.0 || r.cloud_cover < 0.0 || r.cloud_cover > 1.0)
            fail(ErrorKind::Ingestion, "row " + std::to_string(line) + ": value out of physical range");
        out.push_back(std::move(r));
    }
    std::vector<std::pair<std::string, Date>> keys;
    keys.reserve(out.size());
    for (const auto& r : out) keys.emplace_back(r.region_id, r.date);
    std::sort(keys.begin(), keys.end());
    const auto dup = std::adjacent_find(keys.begin(), keys.end());
    if (dup != keys.end())
        fail(ErrorKind::Ingestion, "duplicate record for region '" + dup->first + "' on " + format_iso_date(dup->second));
    return out;
}

std::vector<RegionalDailyRecord> ingest_daily_csv(const std::filesystem::path& path) {
    std::ifstream probe(path);
    if (!probe) fail(ErrorKind::Ingestion, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << probe.rdbuf();
    const std::string text = ss.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) fail(ErrorKind::EmptyInput, "empty input file");
    return parse_daily_csv(text);
}

PanelDataset parse_panel_csv(std::string_view text, std::span<const std::string> required) {
    const auto table = csv::parse(text);
    require(!table.header.empty() && table.header.front() == "week_start", ErrorKind::Ingestion,
            "panel CSV: first column must be 'week_start'");
    for (const auto& name : required) {
        if (std::find(table.header.begin(), table.header.end(), name) == table.header.end())
            fail(ErrorKind::Ingestion, "panel CSV: missing column '" + name + "'");
    }
    if (table.rows.empty()) fail(ErrorKind::EmptyInput, "panel CSV has a header but no rows");

    std::vector<Date> axis;
    axis.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        try {
            axis.push_back(parse_iso_date(table.rows[i][0]));
        } catch (const Error& e) {
            fail(ErrorKind::Ingestion, "row " + std::to_string(table.line_numbers[i]) + ": " + e.what());
        }
    }
    check_axis(axis, table.line_numbers);

    const auto n = static_cast<Eigen::Index>(axis.size());
    PanelDataset panel(std::move(axis));
    for (std::size_t j = 1; j < table.header.size(); ++j) {
        const auto& name = table.header[j];
        require(!name.empty(), ErrorKind::Ingestion, "panel CSV: empty column name");
        require(!panel.has(name), ErrorKind::Ingestion, "panel CSV: duplicate column '" + name + "'");
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto r = static_cast<std::size_t>(i);
            v(i) = csv::parse_number(table.rows[r][j], table.line_numbers[r], name);
        }
        panel.set(name, std::move(v));
    }
    return panel;
}

PanelDataset ingest_panel_csv(const std::filesystem::path& path, std::span<const std::string> required) {
    const auto table_text = [&] {
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(ErrorKind::Ingestion, "cannot open '" + path.string() + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }();
    if (table_text.find_first_not_of(" \t\r\n") == std::string::npos)
        fail(ErrorKind::EmptyInput, "empty input file '" + path.string() + "'");
    return parse_panel_csv(table_text, required);
}

std::string serialize_panel_csv(const PanelDataset& panel) {
    std::string out = "week_start";
    for (const auto& name : panel.names()) out += "," + name;
    out += "\n";
    for (Eigen::Index i = 0; i < panel.length(); ++i) {
        out += format_iso_date(panel.week_starts()[static_cast<std::size_t>(i)]);
        for (const auto& name : panel.names()) out += "," + csv::format_number(panel.column(name)(i));
        out += "\n";
    }
    return out;
}

std::string serialize_daily_csv(std::span<const RegionalDailyRecord> records) {
    std::string out = std::string(daily_csv_header) + "\n";
    for (const auto& r : records) {
        out += r.region_id + "," + format_iso_date(r.date);
        for (double v : {r.temp, r.u10, r.v10, r.precip, r.specific_humidity, r.cloud_cover, r.fwi})
            out += "," + csv::format_number(v);
        out += "\n";
    }
    return out;
}

}  // namespace climdem
