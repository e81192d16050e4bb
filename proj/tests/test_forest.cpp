#include <doctest.h>

#include <set>

#include "climdem/forest.hpp"
#include "climdem/parallel.hpp"
#include "helpers.hpp"

using namespace climdem;

namespace {

SupervisedDataset step_data(Eigen::Index n, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    SupervisedDataset d;
    d.features = testing::gaussian(n, 3, rng);
    d.target.resize(n);
    // only feature 1 matters
    for (Eigen::Index i = 0; i < n; ++i) d.target(i) = d.features(i, 1) > 0.0 ? 10.0 : -10.0;
    d.feature_names = {"noise_a", "signal", "noise_b"};
    return d;
}

}  // namespace

TEST_SUITE("forest") {

TEST_CASE("moving-block counts for 338 rows and 52-week blocks") {
    Rng rng = make_rng(1);
    const BlockDraw d = mbb_indices(338, 52, rng);
    CHECK(d.n_candidate_blocks == 287);
    CHECK(d.block_starts.size() == 7);
    CHECK(d.rows_before_truncation == 364);
    CHECK(d.rows.size() == 338);
    for (std::size_t b = 0; b < d.block_starts.size(); ++b) {
        CHECK(d.block_starts[b] <= 286);
        for (std::size_t i = 0; i < 52 && b * 52 + i < d.rows.size(); ++i)
            CHECK(d.rows[b * 52 + i] == d.block_starts[b] + static_cast<Eigen::Index>(i));
    }
    Rng bad = make_rng(1);
    CHECK_THROWS_AS((void)mbb_indices(40, 52, bad), Error);
}

TEST_CASE("every block start is drawn about equally often") {
    Rng rng = make_rng(4);
    std::vector<int> counts(11, 0);
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(mbb_indices(20, 10, rng).block_starts[0])];
    for (int c : counts) CHECK(c == doctest::Approx(draws / 11.0).epsilon(0.08));
}

TEST_CASE("lagged design lays out target lags, other lags, then extras") {
    std::vector<Date> weeks;
    for (int i = 0; i < 6; ++i) weeks.push_back(parse_iso_date("2020-01-06") + std::chrono::days{7 * i});
    PanelDataset p(weeks);
    p.set("y", Eigen::VectorXd::LinSpaced(6, 0, 5));
    p.set("x", Eigen::VectorXd::LinSpaced(6, 10, 15));
    p.set("e", Eigen::VectorXd::LinSpaced(6, 100, 105));
    const auto d = lagged_design_matrix(p, "y", 2, {"e"});
    REQUIRE(d.rows() == 4);
    CHECK(d.feature_names == std::vector<std::string>{"y_lag1", "y_lag2", "x_lag1", "x_lag2", "e"});
    // row for t = 2
    CHECK(d.target(0) == 2.0);
    CHECK(d.features(0, 0) == 1.0);
    CHECK(d.features(0, 1) == 0.0);
    CHECK(d.features(0, 2) == 11.0);
    CHECK(d.features(0, 3) == 10.0);
    CHECK(d.features(0, 4) == 102.0);
    CHECK(d.week_starts[0] == weeks[2]);

    Eigen::MatrixXd hist(2, 2);
    hist << 4, 14, 5, 15;
    const Eigen::VectorXd row = lagged_feature_row(hist, 2, Eigen::VectorXd::Constant(1, 106.0));
    CHECK(row(0) == 5.0);
    CHECK(row(1) == 4.0);
    CHECK(row(2) == 15.0);
    CHECK(row(3) == 14.0);
    CHECK(row(4) == 106.0);
}

TEST_CASE("forest learns a step, ranks the signal first and reports out-of-bag error") {
    const auto data = step_data(300, 2);
    ForestConfig cfg;
    cfg.n_trees = 100;
    cfg.block_length = 10;
    cfg.mtry = 3;
    cfg.seed = 77;
    const ForestModel f = train_forest(data, cfg);
    const auto ranking = impurity_importance(f);
    CHECK(ranking.front().first == "signal");
    CHECK(ranking.front().second > 50.0 * ranking[1].second);

    Eigen::VectorXd x(3);
    x << 0.0, 1.5, 0.0;
    CHECK(predict(f, x) == doctest::Approx(10.0).epsilon(0.02));
    x(1) = -1.5;
    CHECK(predict(f, x) == doctest::Approx(-10.0).epsilon(0.02));

    const OobReport oob = oob_metrics(f, data);
    CHECK(oob.n_oob + oob.n_excluded == 300);
    CHECK(oob.r2 > 0.9);
    CHECK(oob.r2 == doctest::Approx(1.0 - oob.rsr * oob.rsr).epsilon(1e-12));
    // in-bag flags agree with the recorded blocks
    for (std::size_t b = 0; b < f.trees.size(); ++b) {
        std::set<Eigen::Index> rows;
        for (auto s : f.block_starts[b])
            for (Eigen::Index i = 0; i < cfg.block_length; ++i)
                rows.insert(s + i);
        for (Eigen::Index i = 0; i < 300; ++i)
            if (f.in_bag[b][static_cast<std::size_t>(i)]) CHECK(rows.count(i) == 1);
    }
}

TEST_CASE("importance sums the squared-error decrease of every split") {
    // one tree, no resampling effect on the total: a single split on a two-valued target
    SupervisedDataset d;
    d.features.resize(20, 1);
    d.target.resize(20);
    for (Eigen::Index i = 0; i < 20; ++i) {
        d.features(i, 0) = static_cast<double>(i);
        d.target(i) = i < 10 ? 0.0 : 4.0;
    }
    d.feature_names = {"x"};
    ForestConfig cfg;
    cfg.n_trees = 1;
    cfg.block_length = 20;
    cfg.min_node_size = 2;
    cfg.seed = 1;
    const ForestModel f = train_forest(d, cfg);
    // the single block is the whole sample in order: SSE drops from 20 * 4 to 0
    CHECK(f.importance_sum[0] == doctest::Approx(80.0));
    CHECK(f.trees[0].nodes.size() == 3);
}

TEST_CASE("training is reproducible across thread counts") {
    const auto data = step_data(200, 3);
    ForestConfig cfg;
    cfg.n_trees = 40;
    cfg.block_length = 20;
    cfg.seed = 5;
    set_thread_count(1);
    const ForestModel a = train_forest(data, cfg);
    set_thread_count(4);
    const ForestModel b = train_forest(data, cfg);
    set_thread_count(0);
    CHECK(importance_csv(impurity_importance(a)) == importance_csv(impurity_importance(b)));
    CHECK(oob_json(oob_metrics(a, data)) == oob_json(oob_metrics(b, data)));
    CHECK(predict(a, data.features) == predict(b, data.features));
}

TEST_CASE("configuration is checked against the data") {
    ForestConfig cfg;
    cfg.block_length = 60;
    CHECK_THROWS_AS(cfg.validate(50), Error);
    cfg.block_length = 10;
    cfg.n_trees = 0;
    CHECK_THROWS_AS(cfg.validate(50), Error);
}

}  // TEST_SUITE
