#include <doctest.h>

#include "climdem/metrics.hpp"
#include "climdem/synth.hpp"
#include "helpers.hpp"

using namespace climdem;

TEST_SUITE("metrics") {

TEST_CASE("hand-computed metric values") {
    Eigen::VectorXd actual(4), pred(4);
    actual << 100, 200, 400, 50;
    pred << 110, 180, 400, 60;
    // |10/100| + |20/200| + 0 + |10/50| = 0.4 -> 10 percent
    CHECK(mape(actual, pred) == doctest::Approx(10.0));
    CHECK(rmse(actual, pred) == doctest::Approx(std::sqrt(600.0 / 4.0)));
    const double train_mean = 150.0;
    const double sst = (50.0 * 50 + 50 * 50 + 250 * 250 + 100 * 100) / 4.0;
    CHECK(rsr(actual, pred, train_mean) == doctest::Approx(std::sqrt(150.0 / sst)));
    CHECK(r_squared(actual, pred, train_mean) == doctest::Approx(1.0 - 150.0 / sst));

    Eigen::VectorXd train(6);
    train << 1, 3, 2, 5, 4, 8;
    // lag-2 naive errors: |2-1|, |5-3|, |4-2|, |8-5| -> mean 2
    Eigen::VectorXd a(2), p(2);
    a << 10, 12;
    p << 11, 9;
    CHECK(mase(a, p, train, 2) == doctest::Approx(2.0 / 2.0));
    CHECK_THROWS_AS((void)mase(a, p, Eigen::VectorXd::Constant(6, 1.0), 2), Error);
    Eigen::VectorXd zero(1);
    zero << 0.0;
    CHECK_THROWS_AS((void)mape(zero, zero), Error);
}

TEST_CASE("R squared equals one minus RSR squared") {
    Rng rng = make_rng(12);
    for (int i = 0; i < 200; ++i) {
        const Eigen::VectorXd a = testing::gaussian(30, 1, rng).array() + 10.0;
        const Eigen::VectorXd p = a + 0.5 * testing::gaussian(30, 1, rng);
        const Eigen::VectorXd train = testing::gaussian(80, 1, rng).array() + 10.0;
        const MetricReport r = evaluate_forecast(a, p, train, 4);
        CHECK(std::abs(r.r2 - (1.0 - r.rsr * r.rsr)) < 1e-12);
        CHECK(r.train_mean == doctest::Approx(train.mean()));
    }
}

TEST_CASE("holdout and rolling splits") {
    SplitSpec spec;
    CHECK(holdout_bounds(390, spec) == SliceBounds{0, 338, 338, 390});
    CHECK_THROWS_AS((void)holdout_bounds(300, spec), Error);
    spec.mode = SplitSpec::Mode::Rolling;
    spec.window = 100;
    spec.step = 50;
    spec.horizon = 20;
    const auto folds = rolling_bounds(250, spec);
    REQUIRE(folds.size() == 3);
    CHECK(folds[0] == SliceBounds{0, 100, 100, 120});
    CHECK(folds[2] == SliceBounds{100, 200, 200, 220});

    SynthConfig sc;
    const PanelDataset panel = generate_synthetic_panel(sc);
    SplitSpec hold;
    const auto [train, test] = holdout_split(panel, hold);
    CHECK(train.length() == 338);
    CHECK(test.length() == 52);
    CHECK(test.week_starts().front() == panel.week_starts()[338]);
}

TEST_CASE("comparison flags the best model per column") {
    MetricReport good{5.0, 10.0, 0.5, 0.75, 0.6, 52, 0.0};
    MetricReport bad{9.0, 20.0, 1.0, 0.0, 1.2, 52, 0.0};
    const auto table = compare_models({{"a", bad}, {"b", good}, {"c", good}});
    CHECK_FALSE(table[0].best_rmse);
    CHECK(table[1].best_rmse);
    CHECK(table[2].best_rmse);  // ties are all flagged
    CHECK(table[1].best_r2);
    const std::string csv = comparison_csv(table);
    CHECK(csv.rfind("model,mape,rmse,rsr,r2,mase", 0) == 0);
}

}  // TEST_SUITE
