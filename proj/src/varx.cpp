#include "climdem/varx.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "climdem/csv.hpp"
#include "climdem/linalg.hpp"
#include "climdem/parallel.hpp"
#include "climdem/random.hpp"
#include "climdem/var.hpp"

namespace climdem {

namespace {

constexpr int kMaxResampleAttempts = 16;

std::vector<std::string> default_names(const std::vector<std::string>& names, Eigen::Index k, const char* stem) {
    if (!names.empty()) {
        require(static_cast<Eigen::Index>(names.size()) == k, ErrorKind::Shape,
                std::string("expected one name per ") + stem + " column");
        return names;
    }
    std::vector<std::string> out;
    for (Eigen::Index j = 0; j < k; ++j) out.push_back(std::string(stem) + std::to_string(j + 1));
    return out;
}

void check_varx_inputs(const Eigen::MatrixXd& endog, const Eigen::MatrixXd& exog, int p,
                       const std::vector<std::string>& names) {
    require(p >= 1, ErrorKind::Config, "VARX order must be >= 1");
    require(endog.allFinite() && exog.allFinite(), ErrorKind::InvalidInput, "VARX inputs must be finite");
    require(exog.cols() == 0 || exog.rows() == endog.rows(), ErrorKind::Alignment,
            "exogenous rows (" + std::to_string(exog.rows()) + ") differ from endogenous rows (" +
                std::to_string(endog.rows()) + ")");
    const Eigen::Index t = endog.rows(), k = endog.cols(), m = exog.cols();
    require(k >= 1, ErrorKind::Shape, "VARX needs at least one endogenous series");
    require(t > k * p + m + 10, ErrorKind::InsufficientData,
            "VARX needs T > K*p + M + 10 (T=" + std::to_string(t) + ", K=" + std::to_string(k) + ", p=" +
                std::to_string(p) + ", M=" + std::to_string(m) + ")");
    for (Eigen::Index j = 0; j < k; ++j)
        if (endog.col(j).maxCoeff() == endog.col(j).minCoeff())
            fail(ErrorKind::DegenerateInput, "series '" + names[static_cast<std::size_t>(j)] + "' is constant");
}

Eigen::MatrixXd design(const Eigen::MatrixXd& endog, const Eigen::MatrixXd& exog, int p, Eigen::Index first_row) {
    return exog.cols() > 0 ? lagged_regressors(endog, p, first_row, &exog) : lagged_regressors(endog, p, first_row);
}

double bic_value(const Eigen::MatrixXd& resid, Eigen::Index regressors) {
    const double n = static_cast<double>(resid.rows());
    const double logdet = std::log((resid.transpose() * resid / n).determinant());
    if (!std::isfinite(logdet)) return std::numeric_limits<double>::infinity();
    return logdet + std::log(n) * static_cast<double>(regressors * resid.cols()) / n;
}

template <class Fn>
void run_replicates(int n, std::uint64_t seed, Fn&& replicate) {
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t b) {
        Rng rng = make_rng(substream(seed, static_cast<std::uint64_t>(b)));
        for (int attempt = 0;; ++attempt) {
            try {
                replicate(b, rng);
                return;
            } catch (const Error&) {
                if (attempt + 1 >= kMaxResampleAttempts) throw;
            }
        }
    });
}

Eigen::MatrixXd centered(const Eigen::MatrixXd& resid) { return resid.rowwise() - resid.colwise().mean(); }

Eigen::MatrixXd resample_rows(const Eigen::MatrixXd& pool, Eigen::Index n, Rng& rng) {
    Eigen::MatrixXd out(n, pool.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        out.row(i) = pool.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(pool.rows()))));
    return out;
}

/// Percentile bounds of each element across the draws.
void percentile_bounds(const std::vector<Eigen::MatrixXd>& draws, double level, Eigen::MatrixXd& lower,
                       Eigen::MatrixXd& upper) {
    const Eigen::Index r = draws.front().rows(), c = draws.front().cols();
    lower.resize(r, c);
    upper.resize(r, c);
    std::vector<double> buf(draws.size());
    const double tail = 0.5 * (1.0 - level);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) {
            for (std::size_t b = 0; b < draws.size(); ++b) buf[b] = draws[b](i, j);
            lower(i, j) = quantile(buf, tail);
            upper(i, j) = quantile(buf, 1.0 - tail);
        }
}

Eigen::MatrixXd elementwise_mean(const std::vector<Eigen::MatrixXd>& draws) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(draws.front().rows(), draws.front().cols());
    for (const auto& d : draws) m += d;
    return m / static_cast<double>(draws.size());
}

std::vector<Eigen::MatrixXd> lag_blocks(const Eigen::MatrixXd& stacked, Eigen::Index k, int p) {
    std::vector<Eigen::MatrixXd> out;
    for (int l = 0; l < p; ++l) out.push_back(stacked.middleRows(1 + l * k, k).transpose());
    return out;
}

}  // namespace

ExogenousDesign ExogenousDesign::slice(Eigen::Index begin, Eigen::Index end) const {
    require(begin >= 0 && begin <= end && end <= values.rows(), ErrorKind::Split, "exogenous slice out of range");
    ExogenousDesign out;
    out.week_starts.assign(week_starts.begin() + begin, week_starts.begin() + end);
    out.values = values.middleRows(begin, end - begin);
    out.names = names;
    return out;
}

ExogenousDesign build_exogenous(const std::vector<Date>& week_starts, const std::vector<BaselineColumn>& baselines,
                                int harmonics, bool august15_dummy) {
    require(harmonics >= 0, ErrorKind::Config, "harmonics must be >= 0");
    const auto t = static_cast<Eigen::Index>(week_starts.size());
    for (const auto& b : baselines)
        if (b.values.size() != t)
            fail(ErrorKind::Alignment, "baseline column '" + b.name + "' has " + std::to_string(b.values.size()) +
                                           " rows, the axis has " + std::to_string(t));
    ExogenousDesign out;
    out.week_starts = week_starts;
    const Eigen::Index m = 2 * harmonics + (august15_dummy ? 1 : 0) + static_cast<Eigen::Index>(baselines.size());
    out.values.resize(t, m);
    Eigen::Index col = 0;
    for (int h = 1; h <= harmonics; ++h) {
        for (Eigen::Index i = 0; i < t; ++i) {
            const double w = 2.0 * std::numbers::pi * h * static_cast<double>(i) / 52.0;
            out.values(i, col) = std::sin(w);
            out.values(i, col + 1) = std::cos(w);
        }
        const std::string suffix = h == 1 ? "" : "_" + std::to_string(h);
        out.names.push_back("sin52" + suffix);
        out.names.push_back("cos52" + suffix);
        col += 2;
    }
    if (august15_dummy) {
        for (Eigen::Index i = 0; i < t; ++i)
            out.values(i, col) = week_contains(week_starts[static_cast<std::size_t>(i)], std::chrono::August, std::chrono::day{15}) ? 1.0 : 0.0;
        out.names.emplace_back("august15");
        ++col;
    }
    for (const auto& b : baselines) {
        out.values.col(col++) = b.values;
        out.names.push_back(b.name);
    }
    return out;
}

Eigen::Index VarxModel::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < variable_names.size(); ++i)
        if (variable_names[i] == name) return static_cast<Eigen::Index>(i);
    fail(ErrorKind::Lookup, "unknown endogenous variable '" + name + "'");
}

Eigen::MatrixXd VarxModel::stacked() const {
    const Eigen::Index k = dim(), m = exo_coeff.cols();
    Eigen::MatrixXd s(1 + k * order + m, k);
    s.row(0) = intercept.transpose();
    for (int l = 0; l < order; ++l) s.middleRows(1 + l * k, k) = coeff[static_cast<std::size_t>(l)].transpose();
    if (m > 0) s.bottomRows(m) = exo_coeff.transpose();
    return s;
}

void VarxModel::unstack(const Eigen::MatrixXd& s) {
    const Eigen::Index k = s.cols(), m = s.rows() - 1 - k * order;
    require(m >= 0, ErrorKind::Shape, "stacked coefficients have the wrong shape");
    intercept = s.row(0).transpose();
    coeff = lag_blocks(s, k, order);
    exo_coeff = m > 0 ? Eigen::MatrixXd(s.bottomRows(m).transpose()) : Eigen::MatrixXd(k, 0);
    spectral_radius = climdem::spectral_radius(companion<double>(coeff));
}

VarxModel fit_varx(const Eigen::MatrixXd& endog, const Eigen::MatrixXd& exog, int p,
                   const std::vector<std::string>& names, const std::vector<std::string>& exog_names) {
    const Eigen::Index k = endog.cols(), m = exog.cols();
    VarxModel model;
    model.variable_names = default_names(names, k, "y");
    model.exog_names = default_names(exog_names, m, "x");
    check_varx_inputs(endog, exog, p, model.variable_names);
    model.order = p;
    model.regressor_names = {"const"};
    for (int l = 1; l <= p; ++l)
        for (const auto& v : model.variable_names) model.regressor_names.push_back(v + ".l" + std::to_string(l));
    for (const auto& x : model.exog_names) model.regressor_names.push_back(x);

    const Eigen::MatrixXd z = design(endog, exog, p, p);
    const Eigen::MatrixXd y = endog.bottomRows(endog.rows() - p);
    const auto ls = least_squares(z, y, model.regressor_names);
    model.unstack(ls.coef);
    model.residuals = ls.residuals;
    const double dof = static_cast<double>(y.rows() - z.cols());
    model.resid_cov = ls.residuals.transpose() * ls.residuals / dof;
    model.resid_cov = 0.5 * (model.resid_cov + model.resid_cov.transpose()).eval();
    model.design_inverse = ls.xtx_inv;
    model.std_errors.resize(z.cols(), k);
    for (Eigen::Index i = 0; i < z.cols(); ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            model.std_errors(i, j) = std::sqrt(std::max(0.0, ls.xtx_inv(i, i) * model.resid_cov(j, j)));
    model.bic = bic_value(ls.residuals, z.cols());
    return model;
}

VarxModel fit_varx_bic(const Eigen::MatrixXd& endog, const Eigen::MatrixXd& exog, int max_order,
                       const std::vector<std::string>& names, const std::vector<std::string>& exog_names) {
    check_varx_inputs(endog, exog, max_order, default_names(names, endog.cols(), "y"));
    const Eigen::MatrixXd y = endog.bottomRows(endog.rows() - max_order);
    int best = 1;
    double best_value = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= max_order; ++p) {
        const Eigen::MatrixXd z = design(endog, exog, p, max_order);
        const double v = bic_value(least_squares(z, y).residuals, z.cols());
        if (v < best_value) {
            best_value = v;
            best = p;
        }
    }
    return fit_varx(endog, exog, best, names, exog_names);
}

Eigen::MatrixXd simulate_varx(const VarxModel& model, const Eigen::MatrixXd& initial, const Eigen::MatrixXd& exog,
                              const Eigen::MatrixXd& innovations) {
    const int p = model.order;
    const Eigen::Index k = model.dim(), m = model.exo_coeff.cols();
    const Eigen::Index t = p + innovations.rows();
    require(initial.rows() >= p && initial.cols() == k, ErrorKind::Shape, "simulate_varx: bad initial block");
    require(m == 0 || exog.rows() >= t, ErrorKind::Coverage, "simulate_varx: exogenous rows do not cover the sample");
    Eigen::MatrixXd y(t, k);
    y.topRows(p) = initial.topRows(p);
    for (Eigen::Index i = p; i < t; ++i) {
        Eigen::VectorXd v = model.intercept + innovations.row(i - p).transpose();
        for (int l = 0; l < p; ++l) v.noalias() += model.coeff[static_cast<std::size_t>(l)] * y.row(i - l - 1).transpose();
        if (m > 0) v.noalias() += model.exo_coeff * exog.row(i).transpose();
        y.row(i) = v.transpose();
    }
    return y;
}

double stability_check(const VarxModel& model) { return spectral_radius(companion<double>(model.coeff)); }

void BootstrapConfig::validate() const {
    std::vector<std::string> problems;
    if (n_replicates < 100) problems.emplace_back("n_replicates must be >= 100");
    if (!(level > 0.0 && level < 1.0)) problems.emplace_back("level must lie in (0, 1)");
    if (!problems.empty()) {
        std::string msg = "invalid bootstrap config:";
        for (const auto& p : problems) msg += " " + p + ";";
        fail(ErrorKind::Config, msg);
    }
}

Eigen::MatrixXd BootstrapInference::draw_mean() const {
    require(!draws.empty(), ErrorKind::InvalidInput, "no bootstrap draws");
    return elementwise_mean(draws);
}

BootstrapInference residual_bootstrap(const VarxModel& model, const Eigen::MatrixXd& endog, const Eigen::MatrixXd& exog,
                                      const BootstrapConfig& cfg) {
    cfg.validate();
    require(model.residuals.rows() > 0, ErrorKind::InvalidInput, "model has no residuals");
    require(endog.rows() == model.residuals.rows() + model.order, ErrorKind::Alignment,
            "endogenous sample does not match the fitted model");
    const Eigen::MatrixXd pool = centered(model.residuals);
    BootstrapInference inf;
    inf.n_replicates = cfg.n_replicates;
    inf.level = cfg.level;
    inf.draws.resize(static_cast<std::size_t>(cfg.n_replicates));
    inf.draw_covs.resize(static_cast<std::size_t>(cfg.n_replicates));
    run_replicates(cfg.n_replicates, cfg.seed, [&](std::size_t b, Rng& rng) {
        const Eigen::MatrixXd u = resample_rows(pool, pool.rows(), rng);
        const Eigen::MatrixXd y = simulate_varx(model, endog, exog, u);
        const auto refit = fit_varx(y, exog, model.order, model.variable_names, model.exog_names);
        inf.draws[b] = refit.stacked();
        inf.draw_covs[b] = refit.resid_cov;
    });
    percentile_bounds(inf.draws, cfg.level, inf.lower, inf.upper);
    inf.significant = (inf.lower.array() > 0.0 || inf.upper.array() < 0.0).matrix();
    return inf;
}

VarxModel bias_correct(const VarxModel& model, BootstrapInference& inference, double shrink_step) {
    require(shrink_step > 0.0 && shrink_step < 1.0, ErrorKind::Config, "shrink_step must lie in (0, 1)");
    const double base_radius = stability_check(model);
    if (base_radius >= 1.0)
        fail(ErrorKind::Stability, "point estimate is not stable (spectral radius " + csv::format_number(base_radius) + ")");
    const Eigen::MatrixXd est = model.stacked();
    Eigen::MatrixXd bias = inference.draw_mean() - est;
    bias.row(0).setZero();  // intercept left as estimated
    VarxModel out = model;
    double factor = 1.0;
    for (;;) {
        out.unstack(est - factor * bias);
        if (out.spectral_radius < 1.0) break;
        factor *= shrink_step;
        if (factor < 1e-12) {
            factor = 0.0;
            out.unstack(est);
            break;
        }
    }
    inference.shrink_applied = factor;
    return out;
}

std::string coefficient_report_csv(const VarxModel& model, const BootstrapInference& inference) {
    const Eigen::MatrixXd est = model.stacked();
    require(inference.lower.rows() == est.rows() && inference.lower.cols() == est.cols(), ErrorKind::Shape,
            "inference does not match the model");
    std::string out = "equation,coefficient,estimate,lower,upper,significant\n";
    for (Eigen::Index j = 0; j < est.cols(); ++j)
        for (Eigen::Index i = 0; i < est.rows(); ++i)
            out += model.variable_names[static_cast<std::size_t>(j)] + "," +
                   model.regressor_names[static_cast<std::size_t>(i)] + "," + csv::format_number(est(i, j)) + "," +
                   csv::format_number(inference.lower(i, j)) + "," + csv::format_number(inference.upper(i, j)) + "," +
                   (inference.significant(i, j) ? "1" : "0") + "\n";
    return out;
}

Eigen::MatrixXd forecast_recursive(const VarxModel& model, const Eigen::MatrixXd& history,
                                   const Eigen::MatrixXd& exog_future, Eigen::Index horizon) {
    require(horizon >= 1, ErrorKind::Config, "forecast horizon must be >= 1");
    const int p = model.order;
    const Eigen::Index k = model.dim(), m = model.exo_coeff.cols();
    require(history.rows() >= p && history.cols() == k, ErrorKind::InsufficientData,
            "forecast history must hold at least p rows of every endogenous series");
    if (m > 0 && (exog_future.rows() < horizon || exog_future.cols() != m))
        fail(ErrorKind::Coverage, "exogenous future values cover " + std::to_string(exog_future.rows()) +
                                      " steps, the horizon needs " + std::to_string(horizon));
    Eigen::MatrixXd path(p + horizon, k);
    path.topRows(p) = history.bottomRows(p);
    for (Eigen::Index h = 0; h < horizon; ++h) {
        Eigen::VectorXd v = model.intercept;
        for (int l = 0; l < p; ++l) v.noalias() += model.coeff[static_cast<std::size_t>(l)] * path.row(p + h - l - 1).transpose();
        if (m > 0) v.noalias() += model.exo_coeff * exog_future.row(h).transpose();
        path.row(p + h) = v.transpose();
    }
    return path.bottomRows(horizon);
}

std::vector<Eigen::MatrixXd> orthogonal_irf(const std::vector<Eigen::MatrixXd>& coeff, const Eigen::MatrixXd& resid_cov,
                                            int horizon) {
    require(horizon >= 0, ErrorKind::Config, "IRF horizon must be >= 0");
    const Eigen::Index k = resid_cov.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(resid_cov);
    Eigen::MatrixXd chol;
    if (llt.info() == Eigen::Success) {
        chol = llt.matrixL();
    } else {
        // Semi-definite covariance (e.g. a noiseless replicate): LDL^T gives the same factor where it exists.
        Eigen::LDLT<Eigen::MatrixXd> ldlt(resid_cov);
        require(ldlt.info() == Eigen::Success, ErrorKind::Numerical, "residual covariance is not PSD");
        chol = Eigen::MatrixXd::Zero(k, k);
        const Eigen::MatrixXd l = ldlt.matrixL();
        const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
        chol = ldlt.transpositionsP().transpose() * (l * d.asDiagonal());
    }
    std::vector<Eigen::MatrixXd> phi{Eigen::MatrixXd::Identity(k, k)};
    for (int h = 1; h <= horizon; ++h) {
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, k);
        for (int i = 1; i <= std::min<int>(h, static_cast<int>(coeff.size())); ++i)
            next.noalias() += coeff[static_cast<std::size_t>(i - 1)] * phi[static_cast<std::size_t>(h - i)];
        phi.push_back(std::move(next));
    }
    for (auto& m : phi) m = (m * chol).eval();
    return phi;
}

IrfResult irf(const VarxModel& model, int horizon, const BootstrapInference* inference, double level) {
    const double radius = stability_check(model);
    if (radius >= 1.0) fail(ErrorKind::Stability, "IRF requires a stable model (spectral radius " + csv::format_number(radius) + ")");
    IrfResult res;
    res.variable_names = model.variable_names;
    res.response = orthogonal_irf(model.coeff, model.resid_cov, horizon);
    if (inference && !inference->draws.empty()) {
        const Eigen::Index k = model.dim();
        std::vector<std::vector<Eigen::MatrixXd>> reps(inference->draws.size());
        parallel_for(reps.size(), [&](std::size_t b) {
            reps[b] = orthogonal_irf(lag_blocks(inference->draws[b], k, model.order), inference->draw_covs[b], horizon);
        });
        for (int h = 0; h <= horizon; ++h) {
            std::vector<Eigen::MatrixXd> at_h;
            for (const auto& r : reps) at_h.push_back(r[static_cast<std::size_t>(h)]);
            Eigen::MatrixXd lo, hi;
            percentile_bounds(at_h, level, lo, hi);
            res.lower.push_back(lo);
            res.upper.push_back(hi);
        }
    }
    return res;
}

std::string irf_csv(const IrfResult& r) {
    std::string out = "impulse,response,horizon,value,lower,upper\n";
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    const auto k = static_cast<Eigen::Index>(r.variable_names.size());
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = 0; i < k; ++i)
            for (std::size_t h = 0; h < r.response.size(); ++h) {
                const double lo = r.lower.empty() ? nan : r.lower[h](i, j);
                const double hi = r.upper.empty() ? nan : r.upper[h](i, j);
                out += r.variable_names[static_cast<std::size_t>(j)] + "," + r.variable_names[static_cast<std::size_t>(i)] +
                       "," + std::to_string(h) + "," + csv::format_number(r.response[h](i, j)) + "," +
                       csv::format_number(lo) + "," + csv::format_number(hi) + "\n";
            }
    return out;
}

std::vector<Eigen::MatrixXd> fevd_shares(const std::vector<Eigen::MatrixXd>& coeff, const Eigen::MatrixXd& resid_cov,
                                         const std::vector<int>& horizons) {
    require(!horizons.empty(), ErrorKind::Config, "no FEVD horizons");
    int hmax = 0;
    for (int h : horizons) {
        require(h >= 1, ErrorKind::Config, "FEVD horizons must be >= 1");
        hmax = std::max(hmax, h);
    }
    const auto theta = orthogonal_irf(coeff, resid_cov, hmax - 1);
    const Eigen::Index k = resid_cov.rows();
    std::vector<Eigen::MatrixXd> cumulative;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k, k);
    for (const auto& t : theta) {
        acc += t.array().square().matrix();
        cumulative.push_back(acc);
    }
    std::vector<Eigen::MatrixXd> out;
    for (int h : horizons) {
        const Eigen::MatrixXd& c = cumulative[static_cast<std::size_t>(h - 1)];
        Eigen::MatrixXd share(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const double total = c.row(i).sum();
            for (Eigen::Index j = 0; j < k; ++j) share(i, j) = total > 0.0 ? c(i, j) / total : (i == j ? 1.0 : 0.0);
        }
        out.push_back(share);
    }
    return out;
}

std::vector<int> default_fevd_horizons() {
    std::vector<int> h;
    for (int i = 4; i <= 52; i += 4) h.push_back(i);
    return h;
}

FevdResult fevd(const VarxModel& model, const std::vector<int>& horizons, const BootstrapInference* inference,
                double level) {
    const double radius = stability_check(model);
    if (radius >= 1.0) fail(ErrorKind::Stability, "FEVD requires a stable model (spectral radius " + csv::format_number(radius) + ")");
    FevdResult res;
    res.variable_names = model.variable_names;
    res.horizons = horizons;
    res.point = fevd_shares(model.coeff, model.resid_cov, horizons);
    if (inference && !inference->draws.empty()) {
        const Eigen::Index k = model.dim();
        std::vector<std::vector<Eigen::MatrixXd>> reps(inference->draws.size());
        parallel_for(reps.size(), [&](std::size_t b) {
            reps[b] = fevd_shares(lag_blocks(inference->draws[b], k, model.order), inference->draw_covs[b], horizons);
        });
        for (std::size_t h = 0; h < horizons.size(); ++h) {
            std::vector<Eigen::MatrixXd> at_h;
            for (const auto& r : reps) at_h.push_back(r[h]);
            Eigen::MatrixXd lo, hi;
            percentile_bounds(at_h, level, lo, hi);
            res.mean.push_back(elementwise_mean(at_h));
            res.lower.push_back(lo);
            res.upper.push_back(hi);
        }
    } else {
        res.mean = res.lower = res.upper = res.point;
    }
    return res;
}

std::string fevd_csv(const FevdResult& r) {
    std::string out = "variable,source,horizon,mean,lower,upper\n";
    const auto k = static_cast<Eigen::Index>(r.variable_names.size());
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            for (std::size_t h = 0; h < r.horizons.size(); ++h)
                out += r.variable_names[static_cast<std::size_t>(i)] + "," + r.variable_names[static_cast<std::size_t>(j)] +
                       "," + std::to_string(r.horizons[h]) + "," + csv::format_number(r.mean[h](i, j)) + "," +
                       csv::format_number(r.lower[h](i, j)) + "," + csv::format_number(r.upper[h](i, j)) + "\n";
    return out;
}

namespace {

std::vector<Eigen::Index> cause_rows(const VarxModel& model, Eigen::Index cause) {
    std::vector<Eigen::Index> rows;
    for (int l = 0; l < model.order; ++l) rows.push_back(1 + l * model.dim() + cause);
    return rows;
}

double wald_statistic(const VarxModel& model, Eigen::Index cause, Eigen::Index effect) {
    const auto rows = cause_rows(model, cause);
    const auto q = static_cast<Eigen::Index>(rows.size());
    const Eigen::MatrixXd s = model.stacked();
    Eigen::VectorXd b(q);
    Eigen::MatrixXd v(q, q);
    for (Eigen::Index i = 0; i < q; ++i) {
        b(i) = s(rows[static_cast<std::size_t>(i)], effect);
        for (Eigen::Index j = 0; j < q; ++j)
            v(i, j) = model.design_inverse(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    }
    v *= model.resid_cov(effect, effect);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(v);
    if (ldlt.info() != Eigen::Success || !(model.resid_cov(effect, effect) > 0.0))
        return b.isZero(0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    return b.dot(ldlt.solve(b));
}

}  // namespace

GrangerTestResult granger_test_time_domain(const VarxModel& model, const Eigen::MatrixXd& endog,
                                           const Eigen::MatrixXd& exog, const std::string& cause,
                                           const std::string& effect, const BootstrapConfig& cfg) {
    cfg.validate();
    const Eigen::Index ci = model.index_of(cause), ei = model.index_of(effect);
    require(ci != ei, ErrorKind::InvalidInput, "cause and effect must differ");
    require(endog.rows() == model.residuals.rows() + model.order, ErrorKind::Alignment,
            "endogenous sample does not match the fitted model");
    GrangerTestResult res;
    res.df = model.order;
    res.n_replicates = cfg.n_replicates;
    res.statistic = wald_statistic(model, ci, ei);

    // Restricted effect equation: drop the cause's lags and refit by least squares.
    const int p = model.order;
    const Eigen::MatrixXd z = design(endog, exog, p, p);
    const auto drop = cause_rows(model, ci);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = 0; c < z.cols(); ++c)
        if (std::find(drop.begin(), drop.end(), c) == drop.end()) keep.push_back(c);
    Eigen::MatrixXd zr(z.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) zr.col(static_cast<Eigen::Index>(c)) = z.col(keep[c]);
    const Eigen::VectorXd ye = endog.col(ei).tail(z.rows());
    const auto ls = least_squares(zr, ye);
    Eigen::MatrixXd restricted = model.stacked();
    restricted.col(ei).setZero();
    for (std::size_t c = 0; c < keep.size(); ++c) restricted(keep[c], ei) = ls.coef(static_cast<Eigen::Index>(c), 0);
    VarxModel null_model = model;
    null_model.unstack(restricted);
    Eigen::MatrixXd resid = model.residuals;
    resid.col(ei) = ls.residuals.col(0);
    const Eigen::MatrixXd pool = centered(resid);

    std::vector<double> stats(static_cast<std::size_t>(cfg.n_replicates));
    run_replicates(cfg.n_replicates, cfg.seed, [&](std::size_t b, Rng& rng) {
        const Eigen::MatrixXd u = resample_rows(pool, pool.rows(), rng);
        const Eigen::MatrixXd y = simulate_varx(null_model, endog, exog, u);
        stats[b] = wald_statistic(fit_varx(y, exog, p, model.variable_names, model.exog_names), ci, ei);
    });
    const auto exceed = std::count_if(stats.begin(), stats.end(), [&](double s) { return s >= res.statistic; });
    res.p_value = (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(cfg.n_replicates));
    return res;
}

}  // namespace climdem
