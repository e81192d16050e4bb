// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "climdem/diagnostics.hpp"
#include "climdem/forest.hpp"
#include "climdem/metrics.hpp"
#include "climdem/parallel.hpp"
#include "climdem/pipeline.hpp"
#include "climdem/sparse_var.hpp"
#include "climdem/spectral_gc.hpp"
#include "climdem/trend.hpp"
#include "climdem/var.hpp"
#include "climdem/varx.hpp"
#include "helpers.hpp"

using namespace climdem;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("climdem_acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// ---------------------------------------------------------------- metrics

Outcome metric_identity() {
    Rng rng = make_rng(101);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng() % 60);
        const double level = 50.0 + 1000.0 * testing::gaussian(1, 1, rng)(0, 0);
        const Eigen::VectorXd a = testing::gaussian(n, 1, rng).array() * 20.0 + level;
        const Eigen::VectorXd p = a + 15.0 * testing::gaussian(n, 1, rng);
        const Eigen::VectorXd train = testing::gaussian(3 * n, 1, rng).array() * 20.0 + level + 5.0;
        const double rs = rsr(a, p, train.mean());
        worst = std::max(worst, std::abs(r_squared(a, p, train.mean()) - (1.0 - rs * rs)));
    }
    // forecasting table as printed: (rsr, r2)
    const std::pair<double, double> table[] = {{0.7395, 0.4531}, {0.6658, 0.5567}, {0.6681, 0.5536}, {0.6246, 0.6099}};
    double table_worst = 0.0;
    for (auto [rs, r2] : table) table_worst = std::max(table_worst, std::abs(r2 - (1.0 - rs * rs)));
    return {worst <= 1e-12 && table_worst <= 2e-3,
            fmt("max |R2-(1-RSR^2)| = %.2e over 1000 triples, %.2e on the printed table", worst, table_worst)};
}

// ---------------------------------------------------------------- moving block bootstrap

Outcome mbb_counts() {
    Rng rng = make_rng(7);
    const BlockDraw d = mbb_indices(338, 52, rng);
    const bool ok = d.n_candidate_blocks == 287 && d.block_starts.size() == 7 && d.rows_before_truncation == 364 &&
                    d.rows.size() == 338;
    return {ok, fmt("candidates %ld, drawn %zu, rows before truncation %ld, kept %zu",
                    static_cast<long>(d.n_candidate_blocks), d.block_starts.size(),
                    static_cast<long>(d.rows_before_truncation), d.rows.size())};
}

// ---------------------------------------------------------------- GC spectrum

GcBootstrapConfig gc_config(std::uint64_t seed) {
    GcBootstrapConfig cfg;
    cfg.n_replicates = 500;
    cfg.alpha = 0.05;
    cfg.seed = seed;
    return cfg;
}

Outcome gc_null() {
    const int sims = 200;
    int rejections = 0;
    for (int s = 0; s < sims; ++s) {
        Rng rng = make_rng(substream(303, static_cast<std::uint64_t>(s)));
        const Eigen::MatrixXd xy = testing::gaussian(400, 2, rng);
        const auto r = unconditional_gc_spectrum(xy.col(0), xy.col(1), gc_config(substream(304, static_cast<std::uint64_t>(s))));
        if (r.n_significant_bonferroni() > 0) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / sims;
    return {rate <= 0.13, fmt("family-wise rejection rate %.3f (%d of %d)", rate, rejections, sims)};
}

Outcome gc_power() {
    const int sims = 100;
    int detected = 0;
    for (int s = 0; s < sims; ++s) {
        Rng rng = make_rng(substream(404, static_cast<std::uint64_t>(s)));
        const Eigen::MatrixXd e = testing::gaussian(401, 2, rng);
        const Eigen::VectorXd x = e.col(0).tail(400);
        const Eigen::VectorXd y = 0.8 * e.col(0).head(400) + e.col(1).tail(400);
        const auto r = unconditional_gc_spectrum(x, y, gc_config(substream(405, static_cast<std::uint64_t>(s))));
        if (r.n_significant_bonferroni() > 0) ++detected;
    }
    const double rate = static_cast<double>(detected) / sims;
    return {rate >= 0.95, fmt("detected in %d of %d", detected, sims)};
}

// ---------------------------------------------------------------- VARX bootstrap

Outcome varx_coverage() {
    const int systems = 200;
    const Eigen::Index t = 400, burn = 100;
    long covered = 0, total = 0;
    int unstable = 0;
    for (int s = 0; s < systems; ++s) {
        Rng rng = make_rng(substream(505, static_cast<std::uint64_t>(s)));
        VarxModel truth;
        truth.order = 2;
        do {
            truth.coeff = {0.45 * testing::gaussian(2, 2, rng), 0.25 * testing::gaussian(2, 2, rng)};
        } while (stability_check(truth) > 0.9);
        truth.intercept = testing::gaussian(2, 1, rng);
        truth.exo_coeff = testing::gaussian(2, 1, rng);
        Eigen::Matrix2d chol = Eigen::Matrix2d::Zero();
        chol(0, 0) = 0.5 + std::abs(testing::gaussian(1, 1, rng)(0, 0));
        chol(1, 1) = 0.5 + std::abs(testing::gaussian(1, 1, rng)(0, 0));
        chol(1, 0) = 0.5 * testing::gaussian(1, 1, rng)(0, 0);

        Eigen::MatrixXd x(t + burn, 1);
        for (Eigen::Index i = 0; i < t + burn; ++i) x(i, 0) = std::sin(2.0 * std::numbers::pi * i / 52.0);
        const Eigen::MatrixXd u = testing::gaussian(t + burn - 2, 2, rng) * chol.transpose();
        const Eigen::MatrixXd y = simulate_varx(truth, Eigen::MatrixXd::Zero(2, 2), x, u);

        const Eigen::MatrixXd endog = y.bottomRows(t), exog = x.bottomRows(t);
        const VarxModel m = fit_varx(endog, exog, 2);
        BootstrapConfig bc;
        bc.n_replicates = 499;
        bc.seed = substream(506, static_cast<std::uint64_t>(s));
        BootstrapInference inf = residual_bootstrap(m, endog, exog, bc);
        const Eigen::MatrixXd target = truth.stacked();
        covered += ((inf.lower.array() <= target.array()) && (target.array() <= inf.upper.array())).count();
        total += target.size();
        try {
            if (stability_check(bias_correct(m, inf)) >= 1.0) ++unstable;
        } catch (const Error&) {
            ++unstable;
        }
    }
    const double rate = static_cast<double>(covered) / static_cast<double>(total);
    return {rate >= 0.90 && rate <= 0.99 && unstable == 0,
            fmt("coverage %.4f over %ld coefficients, %d unstable corrected models", rate, total, unstable)};
}

Outcome irf_identities() {
    Rng rng = make_rng(606);
    double irf_err = 0.0, fevd_err = 0.0;
    for (int s = 0; s < 100; ++s) {
        VarxModel m;
        m.order = 1;
        do {
            m.coeff = {0.6 * testing::gaussian(2, 2, rng)};
        } while (stability_check(m) >= 0.95);
        m.intercept = Eigen::VectorXd::Zero(2);
        const Eigen::MatrixXd l = testing::gaussian(2, 2, rng);
        m.resid_cov = l * l.transpose() + 0.1 * Eigen::MatrixXd::Identity(2, 2);
        m.variable_names = {"a", "b"};
        const Eigen::MatrixXd p = m.resid_cov.llt().matrixL();
        const IrfResult r = irf(m, 24);
        Eigen::MatrixXd power = Eigen::MatrixXd::Identity(2, 2);
        for (int h = 0; h <= 24; ++h) {
            const Eigen::MatrixXd expected = power * p;
            irf_err = std::max(irf_err, testing::max_rel_diff(r.response[static_cast<std::size_t>(h)], expected));
            power = power * m.coeff[0];
        }
        const FevdResult f = fevd(m, {1, 2, 3, 4, 6, 8, 12, 26, 52});
        for (const auto& share : f.point) fevd_err = std::max(fevd_err, (share.rowwise().sum().array() - 1.0).abs().maxCoeff());
    }
    VarxModel d;
    d.order = 2;
    d.coeff = {Eigen::Vector2d(0.5, -0.3).asDiagonal(), Eigen::Vector2d(0.2, 0.1).asDiagonal()};
    d.intercept = Eigen::VectorXd::Zero(2);
    d.resid_cov = Eigen::Vector2d(1.3, 0.4).asDiagonal();
    d.variable_names = {"a", "b"};
    bool exact = true;
    for (const auto& r : irf(d, 30).response) exact = exact && r(0, 1) == 0.0 && r(1, 0) == 0.0;
    for (const auto& s : fevd(d, {1, 5, 30}).point) exact = exact && s(0, 1) == 0.0 && s(1, 0) == 0.0;
    return {irf_err <= 1e-10 && fevd_err <= 1e-10 && exact,
            fmt("IRF max rel err %.2e, FEVD row-sum err %.2e, decoupled cross terms %s", irf_err, fevd_err,
                exact ? "exactly zero" : "NONZERO")};
}

// ---------------------------------------------------------------- LASSO

Eigen::MatrixXd var3(Eigen::Index t, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    Eigen::Matrix3d a;
    a << 0.5, 0.0, 0.3, 0.0, 0.4, 0.0, -0.3, 0.0, 0.2;
    const Eigen::MatrixXd e = testing::gaussian(t + 50, 3, rng);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(t + 50, 3);
    for (Eigen::Index i = 1; i < t + 50; ++i) y.row(i) = y.row(i - 1) * a.transpose() + e.row(i);
    y.col(2) = 40.0 * y.col(2).array() + 500.0;  // mixed units
    return y.bottomRows(t);
}

Outcome lasso_oracle() {
    const Eigen::MatrixXd data = var3(250, 707);
    double ols_err = 0.0;
    const SparseVarModel zero = fit_lasso_var(data, 2, 0.0, false);
    const VarModel ols = fit_var_order(data, 2);
    for (int lag = 1; lag <= 2; ++lag)
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = 0; j < 3; ++j)
                ols_err = std::max(ols_err, std::abs(zero.raw_coefficient(i, j, lag) - ols.coeff[lag - 1](i, j)) /
                                                std::max(1.0, std::abs(ols.coeff[lag - 1](i, j))));

    const double lmax = lasso_lambda_max(data, 2);
    const bool empty = fit_lasso_var(data, 2, lmax * 1.000001).support().empty();

    const auto prob = sparse_var_problem(data, 2, true);
    double kkt = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double lambda = lmax * std::pow(10.0, -4.0 * i / 19.0);
        const SparseVarModel m = fit_lasso_var(data, 2, lambda);
        for (Eigen::Index eq = 0; eq < 3; ++eq) {
            Eigen::VectorXd b(6);
            for (int lag = 0; lag < 2; ++lag) b.segment(lag * 3, 3) = m.coeff[static_cast<std::size_t>(lag)].row(eq).transpose();
            kkt = std::max(kkt, testing::kkt_gap(prob.design, prob.response.col(eq), b, lambda));
        }
    }

    Rng rng = make_rng(708);
    Eigen::MatrixXd x = testing::gaussian(40, 6, rng);
    x.col(3) = 0.8 * x.col(1) + 0.2 * x.col(3);
    x.rowwise() -= x.colwise().mean();
    Eigen::VectorXd beta(6);
    beta << 1.5, 0.0, -2.0, 0.0, 0.0, 0.4;
    Eigen::VectorXd y = x * beta + 0.3 * testing::gaussian(40, 1, rng);
    y.array() -= y.mean();
    double prox = 0.0;
    for (double lambda : {0.005, 0.05, 0.2, 0.8}) {
        const auto sol = solve_lasso(x, y, lambda, {1e-14, 1000000});
        prox = std::max(prox, (sol.beta - testing::fista(x, y, lambda)).cwiseAbs().maxCoeff());
        kkt = std::max(kkt, testing::kkt_gap(x, y, sol.beta, lambda));
    }
    return {ols_err <= 1e-6 && empty && kkt <= 1e-6 && prox <= 1e-5,
            fmt("lambda=0 vs OLS %.2e, empty above lambda_max: %s, max KKT %.2e, vs proximal gradient %.2e", ols_err,
                empty ? "yes" : "NO", kkt, prox)};
}

// ---------------------------------------------------------------- trend

Outcome trend_recovery() {
    const Eigen::Index n = 200;
    const double changepoint = 64.0;  // on the default 25-point grid
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto t = static_cast<double>(i);
        y(i) = 100.0 + 0.5 * t + 1.2 * std::max(0.0, t - changepoint) + 3.0 * std::sin(2.0 * std::numbers::pi * t / 52.0) +
               2.0 * std::cos(4.0 * std::numbers::pi * t / 52.0);
    }
    TrendFitConfig cfg;
    cfg.changepoint_penalty = 1e-3;
    const TrendModel m = fit_trend_model(y, cfg);
    const double rel_rmse = std::sqrt((y - fitted_values(m)).squaredNorm() / static_cast<double>(n)) / stddev(y);
    std::size_t active = 0, n_active = 0;
    for (std::size_t j = 0; j < m.rate_adjustments.size(); ++j) {
        if (std::abs(m.rate_adjustments[j]) > 1e-6) ++n_active;
        if (std::abs(m.rate_adjustments[j]) > std::abs(m.rate_adjustments[active])) active = j;
    }
    double season = 0.0;
    for (int t = 0; t < 52; ++t) season += m.seasonal(t + 3.0) / 52.0;
    const bool located = n_active == 1 && m.changepoints[active] == changepoint;
    return {rel_rmse < 1e-6 && located && std::abs(season) < 1e-8,
            fmt("RMSE/SD %.2e, %zu active changepoint(s), largest at %.0f, seasonal mean %.2e", rel_rmse, n_active,
                m.changepoints[active], std::abs(season))};
}

// ---------------------------------------------------------------- residual diagnostics

Outcome diagnostics_calibration() {
    const int sims = 200;
    const Eigen::Index t = 300;
    int null_q = 0, null_arch = 0, alt_q = 0, alt_arch = 0;
    for (int s = 0; s < sims; ++s) {
        Rng rng = make_rng(substream(909, static_cast<std::uint64_t>(s)));
        const Eigen::Index burn = 200;
        const Eigen::MatrixXd z = testing::gaussian(t + burn, 2, rng);
        Eigen::MatrixXd ar = z;
        for (Eigen::Index i = 1; i < t + burn; ++i) ar.row(i) += 0.6 * ar.row(i - 1);
        Eigen::MatrixXd garch = z;
        for (Eigen::Index k = 0; k < 2; ++k) {
            double h = 0.05 / (1.0 - 0.3 - 0.6), prev = 0.0;
            for (Eigen::Index i = 0; i < t + burn; ++i) {
                h = 0.05 + 0.3 * prev * prev + 0.6 * h;
                garch(i, k) = std::sqrt(h) * z(i, k);
                prev = garch(i, k);
            }
        }
        DiagnosticConfig cfg;
        cfg.lags = 12;
        cfg.n_replicates = 499;
        cfg.seed = substream(910, static_cast<std::uint64_t>(s));
        const Eigen::MatrixXd white = z.bottomRows(t);
        null_q += portmanteau_test(white, cfg).p_value < 0.05;
        null_arch += arch_lm_test(white, cfg).p_value < 0.05;
        alt_q += portmanteau_test(ar.bottomRows(t), cfg).p_value < 0.05;
        alt_arch += arch_lm_test(garch.bottomRows(t), cfg).p_value < 0.05;
    }
    auto rate = [&](int k) { return static_cast<double>(k) / sims; };
    const bool ok = rate(null_q) >= 0.02 && rate(null_q) <= 0.09 && rate(null_arch) >= 0.02 && rate(null_arch) <= 0.09 &&
                    rate(alt_q) >= 0.90 && rate(alt_arch) >= 0.90;
    return {ok, fmt("null size: portmanteau %.3f, ARCH-LM %.3f; power: portmanteau vs AR(1) %.3f, ARCH-LM vs GARCH %.3f",
                    rate(null_q), rate(null_arch), rate(alt_q), rate(alt_arch))};
}

// ---------------------------------------------------------------- end to end

Outcome synthetic_reproduction() {
    const RunConfig cfg;
    const PipelineResult res = cmd_pipeline(cfg, scratch("pipeline"));
    std::size_t forward = 0, reverse = 0;
    bool found_forward = false, found_reverse = false;
    for (const auto& g : res.gc) {
        if (!g.conditioning.empty()) continue;
        if (g.cause == cfg.temperature && g.effect == cfg.target) {
            forward = g.spectrum.n_significant_bonferroni();
            found_forward = true;
        }
        if (g.cause == cfg.target && g.effect == cfg.temperature) {
            reverse = g.spectrum.n_significant_bonferroni();
            found_reverse = true;
        }
    }
    const bool gc_ok = found_forward && found_reverse && forward > 0 && reverse == 0;

    auto rank_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < res.select.ranking.size(); ++i)
            if (res.select.ranking[i].first == name) return static_cast<int>(i) + 1;
        return 0;
    };
    const int r_demand = rank_of(cfg.target + "_lag1"), r_temp = rank_of(cfg.temperature + "_lag1");
    const bool rank_ok = r_demand >= 1 && r_demand <= 3 && r_temp >= 1 && r_temp <= 3;

    std::map<std::string, MetricReport> by;
    for (const auto& [name, rep] : res.evaluation.reports) by[name] = rep;
    const bool have = by.count("trend") && by.count("varx") && by.count("forest");
    const bool rmse_ok = have && by["varx"].rmse < by["trend"].rmse && by["forest"].rmse < by["trend"].rmse;
    std::string best;
    for (const auto& [name, rep] : by)
        if (best.empty() || rep.rmse < by[best].rmse) best = name;
    const bool mase_ok = !best.empty() && by[best].mase < 1.0;
    return {gc_ok && rank_ok && rmse_ok && mase_ok,
            fmt("GC significant freqs fwd %zu rev %zu; importance ranks demand lag1 #%d, temperature lag1 #%d; RMSE "
                "trend %.0f varx %.0f forest %.0f; best %s MASE %.3f",
                forward, reverse, r_demand, r_temp, have ? by["trend"].rmse : 0.0, have ? by["varx"].rmse : 0.0,
                have ? by["forest"].rmse : 0.0, best.c_str(), best.empty() ? 0.0 : by[best].mase)};
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[fs::relative(e.path(), root).string()] = ss.str();
    }
    return out;
}

Outcome determinism() {
    const RunConfig cfg;
    std::vector<std::map<std::string, std::string>> runs;
    int i = 0;
    for (std::size_t threads : {1, 1, 4, 4}) {
        set_thread_count(threads);
        const fs::path dir = scratch("determinism_" + std::to_string(i++));
        (void)cmd_pipeline(cfg, dir);
        runs.push_back(tree_contents(dir));
    }
    set_thread_count(0);
    std::set<std::string> differing;
    for (std::size_t r = 1; r < runs.size(); ++r)
        for (const auto& [name, body] : runs[0])
            if (!runs[r].count(name) || runs[r].at(name) != body) differing.insert(name);
    const bool same_files = runs[1].size() == runs[0].size() && runs[2].size() == runs[0].size() &&
                            runs[3].size() == runs[0].size();
    std::string detail = fmt("%zu files compared over 4 runs (threads 1,1,4,4)", runs[0].size());
    for (const auto& d : differing) detail += "; differs: " + d;
    return {differing.empty() && same_files && runs[0].size() > 10, detail};
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::vector<int> only;
    app.add_option("--only", only, "Run just these criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all = {
        {1, "metric identity", 1, metric_identity},
        {2, "moving-block bootstrap counts", 1, mbb_counts},
        {3, "GC spectrum null calibration", 600, gc_null},
        {4, "GC spectrum power", 300, gc_power},
        {5, "VARX bootstrap coverage and stable bias correction", 600, varx_coverage},
        {6, "IRF and FEVD identities", 10, irf_identities},
        {7, "LASSO oracles", 30, lasso_oracle},
        {8, "trend recovery", 30, trend_recovery},
        {9, "diagnostics calibration", 600, diagnostics_calibration},
        {10, "synthetic end-to-end findings", 900, synthetic_reproduction},
        {11, "determinism across runs and threads", 300, determinism},
    };
    int failures = 0;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_seconds;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("%s criterion %d (%s): %s [%.2fs of %.0fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.budget_seconds, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
