#include <doctest.h>

#include <cmath>
#include <string>

#include "climdem/csv.hpp"
#include "climdem/random.hpp"
#include "climdem/series.hpp"
#include "climdem/synth.hpp"
#include "helpers.hpp"

using namespace climdem;

TEST_SUITE("series") {

TEST_CASE("dates parse, format and reject nonsense") {
    const Date d = parse_iso_date("2016-01-04");
    CHECK(is_monday(d));
    CHECK(format_iso_date(d) == "2016-01-04");
    CHECK_THROWS_AS((void)parse_iso_date("2016-02-30"), Error);
    CHECK_THROWS_AS((void)parse_iso_date("2016/01/04"), Error);
    CHECK(week_contains(parse_iso_date("2016-08-15"), std::chrono::August, std::chrono::day{15}));
    CHECK(week_contains(parse_iso_date("2016-08-09"), std::chrono::August, std::chrono::day{15}));
    CHECK_FALSE(week_contains(parse_iso_date("2016-08-16"), std::chrono::August, std::chrono::day{15}));
}

TEST_CASE("weekly feature helpers") {
    CHECK(derive_wind_speed(3.0, 4.0) == doctest::Approx(5.0));
    CHECK_THROWS_AS((void)derive_wind_speed(std::nan(""), 1.0), Error);

    const std::array<double, 7> p{0.0, 1.0, 1.5, 0.2, 12.0, 0.0, 3.0};
    CHECK(weekly_wet_days(p) == 3);  // strictly above 1 mm
    CHECK(weekly_extreme_rainfall(p, 2.0) == doctest::Approx(15.0));

    const std::array<double, 7> t{10, 12, 14, 16, 18, 20, 22};
    // population SD of an arithmetic sequence with step 2: 2 * sqrt((7^2 - 1) / 12) = 4
    CHECK(weekly_temperature_sd(t) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("daily records aggregate to the national weekly panel") {
    std::vector<RegionalDailyRecord> recs;
    const Date start = parse_iso_date("2020-01-06");
    for (const char* region : {"A", "B"}) {
        for (int d = 0; d < 14; ++d) {
            RegionalDailyRecord r;
            r.region_id = region;
            r.date = start + std::chrono::days{d};
            const double off = region[0] == 'A' ? 0.0 : 10.0;
            r.temp = off + d;
            r.u10 = 3.0;
            r.v10 = 4.0;
            r.precip = d % 2 == 0 ? 2.0 : 0.0;
            r.specific_humidity = 5.0 + off;
            r.cloud_cover = 0.5;
            r.fwi = 1.0;
            recs.push_back(r);
        }
    }
    const PanelDataset p = aggregate_weekly_national(recs);
    REQUIRE(p.length() == 2);
    CHECK(p.week_starts()[1] == start + std::chrono::days{7});
    CHECK(p.column(columns::temperature)(0) == doctest::Approx((3.0 + 13.0) / 2.0));
    CHECK(p.column(columns::temperature)(1) == doctest::Approx((10.0 + 20.0) / 2.0));
    CHECK(p.column(columns::wind_speed)(0) == doctest::Approx(5.0));
    CHECK(p.column(columns::specific_humidity)(0) == doctest::Approx(10.0));
    // week 0: days 0,2,4,6 wet in both regions; wet days average over regions, rain adds up
    CHECK(p.column(columns::wet_days)(0) == doctest::Approx(4.0));
    CHECK(p.column(columns::precipitation)(0) == doctest::Approx(16.0));
    CHECK(p.column(columns::temperature_sd)(0) == doctest::Approx(2.0));
    CHECK_FALSE(p.has(columns::drug_demand));

    auto broken = recs;
    broken.erase(broken.begin() + 3);
    CHECK_THROWS_AS((void)aggregate_weekly_national(broken), Error);
}

TEST_CASE("HP cycle matches a dense solve of (I + lambda D'D) trend = y") {
    Rng rng = make_rng(7);
    NormalSampler normal;
    const Eigen::Index n = 60;
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = 0.1 * static_cast<double>(i) + std::sin(0.3 * i) + normal(rng);
    HpConfig cfg;
    cfg.lambda = 1600.0;
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n - 2, n);
    for (Eigen::Index i = 0; i < n - 2; ++i) d.row(i).segment(i, 3) << 1.0, -2.0, 1.0;
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + cfg.lambda * d.transpose() * d;
    const Eigen::VectorXd trend = a.ldlt().solve(y);
    CHECK((hp_cycle(y, cfg) - (y - trend)).cwiseAbs().maxCoeff() < 1e-9);

    // a straight line has no cycle
    Eigen::VectorXd line = Eigen::VectorXd::LinSpaced(n, -3.0, 9.0);
    CHECK(hp_cycle(line, cfg).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("panel CSV round trip and ingestion errors") {
    SynthConfig sc;
    sc.length = 80;
    sc.level_shifts = {{40, 1000.0}};
    const PanelDataset panel = generate_synthetic_panel(sc);
    const std::string text = serialize_panel_csv(panel);
    const PanelDataset back = parse_panel_csv(text);
    REQUIRE(back.names() == panel.names());
    for (const auto& n : panel.names())
        CHECK((back.column(n) - panel.column(n)).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + panel.column(n).cwiseAbs().maxCoeff()));

    const std::vector<std::string> need{"missing_column"};
    CHECK_THROWS_AS((void)parse_panel_csv(text, need), Error);
    CHECK_THROWS_AS((void)parse_panel_csv("week_start,x\n2020-01-06,1\n2020-01-20,2\n"), Error);  // gap
    CHECK_THROWS_AS((void)parse_panel_csv("week_start,x\n2020-01-07,1\n"), Error);                // not a Monday
    CHECK_THROWS_AS((void)parse_panel_csv("week_start,x\n2020-01-06,abc\n"), Error);
}

TEST_CASE("synthetic daily records aggregate back to the weekly panel") {
    SynthConfig sc;
    sc.length = 70;
    sc.level_shifts.clear();
    const PanelDataset panel = generate_synthetic_panel(sc);
    const auto recs = synthetic_daily_records(panel, 3, 11);
    const PanelDataset daily_csv = aggregate_weekly_national(parse_daily_csv(serialize_daily_csv(recs)));
    const PanelDataset direct = aggregate_weekly_national(recs);
    for (const char* c : {columns::temperature, columns::wind_speed, columns::cloud_cover, columns::specific_humidity,
                          columns::precipitation, columns::fwi}) {
        CAPTURE(c);
        CHECK(max_rel_diff(direct.column(c), panel.column(c)) < 1e-10);
        CHECK(max_rel_diff(daily_csv.column(c), panel.column(c)) < 1e-7);
    }
}

}  // TEST_SUITE
