#include <doctest.h>

#include <complex>
#include <numbers>

#include "climdem/parallel.hpp"
#include "climdem/spectral_gc.hpp"
#include "helpers.hpp"

using namespace climdem;

namespace {

// cause x_t = c x_{t-1} + u, effect y_t = a y_{t-1} + b x_{t-1} + e, independent innovations
VarModel bivariate(double a, double b, double c, double var_e, double var_u) {
    VarModel m;
    m.order = 1;
    m.intercept = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd a1(2, 2);
    a1 << c, 0.0, b, a;
    m.coeff = {a1};
    m.resid_cov = Eigen::Vector2d(var_u, var_e).asDiagonal();
    return m;
}

Eigen::MatrixXd simulate_pair(double b, Eigen::Index t, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    const Eigen::MatrixXd e = testing::gaussian(t + 50, 2, rng);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(t + 50, 2);
    for (Eigen::Index i = 1; i < t + 50; ++i) {
        out(i, 0) = 0.5 * out(i - 1, 0) + e(i, 0);
        out(i, 1) = 0.3 * out(i - 1, 1) + b * out(i - 1, 0) + e(i, 1);
    }
    return out.bottomRows(t);
}

}  // namespace

TEST_SUITE("spectral_gc") {

TEST_CASE("Fourier frequencies are i/T up to Nyquist") {
    const auto f = fourier_frequencies(390);
    REQUIRE(f.size() == 195);
    CHECK(f(0) == doctest::Approx(1.0 / 390));
    CHECK(f(194) == doctest::Approx(0.5));
}

TEST_CASE("spectrum of a bivariate VAR(1) matches the closed form") {
    const double a = 0.4, b = 0.7, c = 0.6, ve = 1.5, vu = 0.8;
    const VarModel m = bivariate(a, b, c, ve, vu);
    Eigen::VectorXd omega = Eigen::VectorXd::LinSpaced(40, 0.01, std::numbers::pi);
    const Eigen::VectorXd f = gc_spectrum_from_var(m, 0, 1, omega);
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
        const std::complex<double> z = std::polar(1.0, -omega(i));
        const double expected = std::log(1.0 + b * b * vu / (ve * std::norm(1.0 - c * z)));
        CHECK(f(i) == doctest::Approx(expected).epsilon(1e-10));
    }
    // the effect does not enter the cause's equation, so the reverse spectrum vanishes
    CHECK(gc_spectrum_from_var(m, 1, 0, omega).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Bonferroni threshold uses the min(alpha, 2 alpha / F) quantile of the medians") {
    std::vector<double> medians;
    for (int i = 1; i <= 101; ++i) medians.push_back(i);
    const auto th = thresholds_from_medians(medians, 0.05, 10);
    CHECK(th.pointwise == doctest::Approx(96.0));    // type-7 quantile at 0.95 of 1..101
    CHECK(th.bonferroni == doctest::Approx(100.0));  // level 0.01
    const auto loose = thresholds_from_medians(medians, 0.05, 1);
    CHECK(loose.bonferroni == doctest::Approx(loose.pointwise));
}

TEST_CASE("stationary bootstrap keeps the length and resamples observed values") {
    Rng rng = make_rng(3);
    const auto idx = stationary_bootstrap_indices(200, 6.0, rng);
    REQUIRE(idx.size() == 200);
    for (auto i : idx) CHECK((i >= 0 && i < 200));
    // mean run length of consecutive indices is close to the expected block length
    int runs = 1;
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i] != (idx[i - 1] + 1) % 200) ++runs;
    CHECK(200.0 / runs == doctest::Approx(6.0).epsilon(0.5));

    GcBootstrapConfig cfg;
    CHECK(cfg.block_length_for(390) == doctest::Approx(8.0));  // ceil(390^(1/3))
}

TEST_CASE("coupled pair is significant, independent pair is not, and results are reproducible") {
    GcBootstrapConfig cfg;
    cfg.n_replicates = 200;
    cfg.seed = 99;
    const Eigen::MatrixXd coupled = simulate_pair(0.8, 300, 1);
    const SpectrumResult r = unconditional_gc_spectrum(coupled.col(0), coupled.col(1), cfg);
    CHECK(r.n_significant_bonferroni() > 0);
    CHECK(r.estimate.size() == 150);
    CHECK(r.bootstrap_medians.size() == 200);

    const Eigen::MatrixXd indep = simulate_pair(0.0, 300, 2);
    const SpectrumResult n = unconditional_gc_spectrum(indep.col(0), indep.col(1), cfg);
    CHECK(n.n_significant_bonferroni() == 0);

    set_thread_count(1);
    const std::string one = unconditional_gc_spectrum(coupled.col(0), coupled.col(1), cfg).to_csv();
    set_thread_count(4);
    const std::string four = unconditional_gc_spectrum(coupled.col(0), coupled.col(1), cfg).to_csv();
    set_thread_count(0);
    CHECK(one == four);
    CHECK(one == r.to_csv());
}

TEST_CASE("conditioning on the true driver removes an indirect link") {
    // w drives both x and y; x has no direct effect on y
    Rng rng = make_rng(8);
    const Eigen::Index t = 300;
    const Eigen::MatrixXd e = testing::gaussian(t, 3, rng);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(t), x = w, y = w;
    for (Eigen::Index i = 1; i < t; ++i) {
        w(i) = 0.6 * w(i - 1) + e(i, 0);
        x(i) = 0.9 * w(i - 1) + 0.3 * e(i, 1);
        y(i) = 0.9 * w(i - 1) + 0.3 * e(i, 2);
    }
    GcBootstrapConfig cfg;
    cfg.n_replicates = 200;
    cfg.seed = 5;
    const SpectrumResult cond = conditional_gc_spectrum(x, y, w, cfg);
    CHECK(cond.estimate.maxCoeff() < 0.1);
    CHECK(cond.n_significant_bonferroni() == 0);
}

TEST_CASE("invalid bootstrap settings are rejected") {
    GcBootstrapConfig cfg;
    cfg.n_replicates = 50;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.n_replicates = 500;
    cfg.alpha = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

}  // TEST_SUITE
