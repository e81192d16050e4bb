#include <doctest.h>

#include "climdem/diagnostics.hpp"
#include "climdem/error.hpp"
#include "climdem/parallel.hpp"
#include "helpers.hpp"

using namespace climdem;

TEST_SUITE("diagnostics") {

TEST_CASE("univariate portmanteau reduces to Box-Pierce") {
    Rng rng = make_rng(1);
    const Eigen::VectorXd e = testing::gaussian(150, 1, rng);
    const Eigen::VectorXd u = e.array() - e.mean();
    const double c0 = u.squaredNorm();
    double q = 0.0;
    for (int h = 1; h <= 6; ++h) {
        const double r = u.tail(150 - h).dot(u.head(150 - h)) / c0;
        q += r * r;
    }
    CHECK(portmanteau_statistic(e, 6) == doctest::Approx(150.0 * q).epsilon(1e-12));
}

TEST_CASE("portmanteau is invariant to an invertible mix of the columns") {
    Rng rng = make_rng(2);
    const Eigen::MatrixXd e = testing::gaussian(200, 2, rng);
    Eigen::Matrix2d mix;
    mix << 2.0, 0.5, -1.0, 3.0;
    CHECK(portmanteau_statistic(e * mix, 5) == doctest::Approx(portmanteau_statistic(e, 5)).epsilon(1e-10));
}

TEST_CASE("ARCH-LM statistic is T R^2 of the squared-residual regression") {
    Rng rng = make_rng(3);
    const Eigen::VectorXd e = testing::gaussian(120, 1, rng);
    const int q = 3;
    const Eigen::VectorXd s = (e.array() - e.mean()).square().matrix();
    const Eigen::Index n = 120 - q;
    Eigen::MatrixXd x(n, q + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        for (int l = 1; l <= q; ++l) x(i, l) = s(i + q - l);
    }
    const Eigen::VectorXd y = s.tail(n);
    const Eigen::VectorXd b = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    const double r2 = 1.0 - (y - x * b).squaredNorm() / (y.array() - y.mean()).square().sum();
    CHECK(arch_lm_statistic(e, q) == doctest::Approx(n * r2).epsilon(1e-9));
}

TEST_CASE("tests flag autocorrelation and volatility clustering") {
    Rng rng = make_rng(4);
    const Eigen::MatrixXd z = testing::gaussian(300, 2, rng);
    Eigen::MatrixXd ar = z;
    for (Eigen::Index i = 1; i < 300; ++i) ar.row(i) += 0.6 * ar.row(i - 1);
    Eigen::MatrixXd garch = z;
    for (Eigen::Index k = 0; k < 2; ++k) {
        double h = 0.05 / 0.1, prev = 0.0;
        for (Eigen::Index i = 0; i < 300; ++i) {
            h = 0.05 + 0.3 * prev * prev + 0.6 * h;
            garch(i, k) = std::sqrt(h) * z(i, k);
            prev = garch(i, k);
        }
    }
    DiagnosticConfig cfg;
    cfg.n_replicates = 199;
    cfg.seed = 9;
    CHECK(portmanteau_test(ar, cfg).p_value < 0.05);
    CHECK(portmanteau_test(z, cfg).p_value > 0.01);
    const auto arch = arch_lm_test(garch, cfg);
    CHECK(arch.p_value < 0.05);
    REQUIRE(arch.equation_p_values.size() == 2);
    const double smallest = std::min(arch.equation_p_values[0], arch.equation_p_values[1]);
    CHECK(arch.p_value == doctest::Approx(std::min(1.0, 2.0 * smallest)));

    set_thread_count(1);
    const auto a = portmanteau_test(z, cfg);
    set_thread_count(4);
    const auto b = portmanteau_test(z, cfg);
    set_thread_count(0);
    CHECK(a.p_value == b.p_value);
    CHECK_THROWS_AS((void)portmanteau_test(z.topRows(20), cfg), Error);
}

}  // TEST_SUITE
