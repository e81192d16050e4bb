#include "climdem/spectral_gc.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "climdem/csv.hpp"
#include "climdem/parallel.hpp"

namespace climdem {

namespace {

constexpr int kMaxResampleAttempts = 16;

void check_series(const Eigen::VectorXd& s, const char* role) {
    require(s.allFinite(), ErrorKind::InvalidInput, std::string(role) + " series must be finite");
    require(s.size() > 0 && s.maxCoeff() > s.minCoeff(), ErrorKind::DegenerateInput,
            std::string(role) + " series has zero variance");
}

Eigen::VectorXd angular(Eigen::Index t) { return 2.0 * std::numbers::pi * fourier_frequencies(t); }

double median_of(const Eigen::VectorXd& v) { return median(std::vector<double>(v.data(), v.data() + v.size())); }

/// Runs `replicate(rng)` for each bootstrap index; a replicate that throws (e.g. a
/// degenerate resample) is redrawn from the continuing stream.
template <class Fn>
std::vector<double> run_replicates(const GcBootstrapConfig& cfg, Fn&& replicate) {
    std::vector<double> medians(static_cast<std::size_t>(cfg.n_replicates));
    parallel_for(medians.size(), [&](std::size_t b) {
        Rng rng = make_rng(substream(cfg.seed, static_cast<std::uint64_t>(b)));
        for (int attempt = 0;; ++attempt) {
            try {
                medians[b] = replicate(rng);
                return;
            } catch (const Error&) {
                if (attempt + 1 >= kMaxResampleAttempts) throw;
            }
        }
    });
    return medians;
}

}  // namespace

void GcBootstrapConfig::validate() const {
    require(n_replicates >= 100, ErrorKind::Config, "n_replicates must be >= 100 for inference");
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::Config, "alpha must be in (0,1)");
    require(expected_block_length <= 0.0 || expected_block_length >= 1.0, ErrorKind::Config,
            "expected_block_length must be >= 1");
    require(max_var_order >= 1, ErrorKind::Config, "max_var_order must be >= 1");
}

double GcBootstrapConfig::block_length_for(Eigen::Index t) const {
    if (expected_block_length > 0.0) return expected_block_length;
    return std::ceil(std::cbrt(static_cast<double>(t)));
}

Eigen::VectorXd fourier_frequencies(Eigen::Index t) {
    const Eigen::Index f = t / 2;
    Eigen::VectorXd out(f);
    for (Eigen::Index i = 0; i < f; ++i) out(i) = static_cast<double>(i + 1) / static_cast<double>(t);
    return out;
}

Eigen::VectorXd gc_spectrum_from_var(const VarModel& model, Eigen::Index cause, Eigen::Index effect,
                                     const Eigen::VectorXd& omega) {
    require(model.dim() == 2, ErrorKind::Shape, "unconditional spectrum needs a bivariate VAR");
    require(cause != effect && cause >= 0 && cause < 2 && effect >= 0 && effect < 2, ErrorKind::InvalidInput,
            "cause and effect must be distinct indices of the bivariate VAR");
    const Eigen::MatrixXd& sigma = model.resid_cov;
    const double s_ee = sigma(effect, effect);
    const double s_ce = sigma(cause, effect);
    require(s_ee > 0.0, ErrorKind::Numerical, "effect innovation variance is not positive");
    const double beta = s_ce / s_ee;
    const double s_cc_orth = sigma(cause, cause) - s_ce * beta;

    Eigen::VectorXd out(omega.size());
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
        const Eigen::Matrix2cd a = lag_polynomial(model.coeff, omega(i));
        const std::complex<double> det = a.determinant();
        require(std::abs(det) > 0.0, ErrorKind::Numerical, "VAR transfer function is not invertible");
        Eigen::Matrix2cd h;
        h << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
        h /= det;
        // Normalized transfer function: the effect column absorbs beta * cause column.
        const std::complex<double> h_ee = h(effect, effect) + beta * h(effect, cause);
        const std::complex<double> h_ec = h(effect, cause);
        const double own = s_ee * std::norm(h_ee);
        require(own > 0.0, ErrorKind::Numerical, "degenerate transfer function");
        out(i) = std::log1p(s_cc_orth * std::norm(h_ec) / own);
    }
    return out;
}

Eigen::VectorXd unconditional_gc_estimate(const Eigen::VectorXd& cause, const Eigen::VectorXd& effect, int max_order,
                                          int* order_out) {
    require(cause.size() == effect.size(), ErrorKind::Shape, "cause and effect differ in length");
    check_series(cause, "cause");
    check_series(effect, "effect");
    Eigen::MatrixXd data(cause.size(), 2);
    data << cause, effect;
    const VarModel model = fit_var(data, max_order);
    if (order_out) *order_out = model.order;
    return gc_spectrum_from_var(model, 0, 1, angular(cause.size()));
}

Eigen::VectorXd conditional_gc_estimate(const Eigen::VectorXd& cause, const Eigen::VectorXd& effect,
                                        const Eigen::VectorXd& conditioning, int max_order, int* order_out) {
    require(cause.size() == effect.size() && cause.size() == conditioning.size(), ErrorKind::Shape,
            "cause, effect and conditioning series differ in length");
    check_series(cause, "cause");
    check_series(effect, "effect");
    check_series(conditioning, "conditioning");
    const Eigen::Index t = cause.size();

    Eigen::MatrixXd reduced(t, 2);  // (effect, conditioning)
    reduced << effect, conditioning;
    const int p = select_var_order(reduced, max_order);
    const VarModel bivariate = fit_var_order(reduced, p);
    Eigen::MatrixXd full(t, 3);  // (effect, cause, conditioning)
    full << effect, cause, conditioning;
    const VarModel trivariate = fit_var_order(full, p);
    if (order_out) *order_out = p;

    const double gamma_yy = bivariate.resid_cov(0, 0);
    const Eigen::MatrixXd& sigma = trivariate.resid_cov;
    const double s_yy = sigma(0, 0);
    require(gamma_yy > 0.0 && s_yy > 0.0, ErrorKind::Numerical, "non-positive innovation variance");
    const double beta_x = sigma(1, 0) / s_yy;
    const double beta_w = sigma(2, 0) / s_yy;

    const Eigen::VectorXd omega = angular(t);
    Eigen::VectorXd out(omega.size());
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
        const Eigen::Matrix2cd g_inv = lag_polynomial(bivariate.coeff, omega(i));
        const Eigen::Matrix3cd a = lag_polynomial(trivariate.coeff, omega(i));
        Eigen::FullPivLU<Eigen::Matrix3cd> lu(a);
        require(lu.isInvertible(), ErrorKind::Numerical, "trivariate transfer function is not invertible");
        const Eigen::Matrix3cd h = lu.inverse();
        // Effect column of the normalized transfer function (rows: effect, cause, conditioning).
        const Eigen::Vector3cd h_y = h.col(0) + beta_x * h.col(1) + beta_w * h.col(2);
        const std::complex<double> q_yy = g_inv(0, 0) * h_y(0) + g_inv(0, 1) * h_y(2);
        const double denom = s_yy * std::norm(q_yy);
        require(denom > 0.0, ErrorKind::Numerical, "degenerate conditional transfer function");
        out(i) = std::log(gamma_yy / denom);
    }
    return out;
}

std::vector<Eigen::Index> stationary_bootstrap_indices(Eigen::Index t, double expected_block_length, Rng& rng) {
    require(expected_block_length >= 1.0, ErrorKind::Config, "expected block length must be >= 1");
    require(t > 0, ErrorKind::EmptyInput, "cannot resample an empty series");
    const double restart = 1.0 / expected_block_length;
    const auto n = static_cast<std::size_t>(t);
    std::vector<Eigen::Index> idx(n);
    auto current = static_cast<Eigen::Index>(uniform_index(rng, n));
    idx[0] = current;
    for (std::size_t i = 1; i < n; ++i) {
        if (uniform01(rng) < restart) {
            current = static_cast<Eigen::Index>(uniform_index(rng, n));
        } else {
            current = (current + 1) % t;
        }
        idx[i] = current;
    }
    return idx;
}

Eigen::VectorXd stationary_bootstrap(const Eigen::VectorXd& series, double expected_block_length, Rng& rng) {
    const auto idx = stationary_bootstrap_indices(series.size(), expected_block_length, rng);
    Eigen::VectorXd out(series.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = series(idx[i]);
    return out;
}

GcThresholds thresholds_from_medians(std::vector<double> medians, double alpha, Eigen::Index n_freq) {
    GcThresholds th;
    th.pointwise = quantile(medians, 1.0 - alpha);
    const double adjusted = std::min(alpha, 2.0 * alpha / static_cast<double>(std::max<Eigen::Index>(n_freq, 1)));
    th.bonferroni = quantile(medians, 1.0 - adjusted);
    th.medians = std::move(medians);
    return th;
}

GcThresholds bootstrap_threshold_unconditional(const Eigen::VectorXd& cause, const Eigen::VectorXd& effect,
                                               const GcBootstrapConfig& cfg) {
    cfg.validate();
    require(cause.size() == effect.size(), ErrorKind::Shape, "cause and effect differ in length");
    const double block = cfg.block_length_for(cause.size());
    auto medians = run_replicates(cfg, [&](Rng& rng) {
        const Eigen::VectorXd xs = stationary_bootstrap(cause, block, rng);
        const Eigen::VectorXd ys = stationary_bootstrap(effect, block, rng);
        return median_of(unconditional_gc_estimate(xs, ys, cfg.max_var_order));
    });
    return thresholds_from_medians(std::move(medians), cfg.alpha, cause.size() / 2);
}

GcThresholds bootstrap_threshold_conditional(const Eigen::VectorXd& cause, const Eigen::VectorXd& effect,
                                             const Eigen::VectorXd& conditioning, const GcBootstrapConfig& cfg) {
    cfg.validate();
    require(cause.size() == effect.size() && cause.size() == conditioning.size(), ErrorKind::Shape,
            "cause, effect and conditioning series differ in length");
    check_series(cause, "cause");
    const Eigen::Index t = cause.size();
    Eigen::MatrixXd reduced(t, 2);
    reduced << effect, conditioning;
    const VarModel null_model = fit_var(reduced, cfg.max_var_order);
    const Eigen::MatrixXd centered = null_model.residuals.rowwise() - null_model.residuals.colwise().mean();
    const Eigen::MatrixXd initial = reduced.topRows(null_model.order);
    const double block = cfg.block_length_for(t);

    auto medians = run_replicates(cfg, [&](Rng& rng) {
        Eigen::MatrixXd draws(centered.rows(), 2);
        for (Eigen::Index i = 0; i < draws.rows(); ++i)
            draws.row(i) = centered.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(centered.rows()))));
        const Eigen::MatrixXd sim = simulate_var(null_model.intercept, null_model.coeff, initial, draws);
        const Eigen::VectorXd xs = stationary_bootstrap(cause, block, rng);
        return median_of(conditional_gc_estimate(xs, sim.col(0), sim.col(1), cfg.max_var_order));
    });
    return thresholds_from_medians(std::move(medians), cfg.alpha, t / 2);
}

namespace {

SpectrumResult assemble(Eigen::Index t, Eigen::VectorXd estimate, int order, GcThresholds th) {
    SpectrumResult r;
    r.frequencies = fourier_frequencies(t);
    r.estimate = std::move(estimate);
    r.var_order = order;
    const Eigen::Index f = r.frequencies.size();
    r.threshold_alpha = Eigen::VectorXd::Constant(f, th.pointwise);
    r.threshold_bonferroni = Eigen::VectorXd::Constant(f, th.bonferroni);
    r.sig_alpha.resize(static_cast<std::size_t>(f));
    r.sig_bonferroni.resize(static_cast<std::size_t>(f));
    for (Eigen::Index i = 0; i < f; ++i) {
        r.sig_alpha[static_cast<std::size_t>(i)] = r.estimate(i) > r.threshold_alpha(i);
        r.sig_bonferroni[static_cast<std::size_t>(i)] = r.estimate(i) > r.threshold_bonferroni(i);
    }
    r.bootstrap_medians = std::move(th.medians);
    return r;
}

}  // namespace

SpectrumResult unconditional_gc_spectrum(const Eigen::VectorXd& cause, const Eigen::VectorXd& effect,
                                         const GcBootstrapConfig& cfg) {
    cfg.validate();
    int order = 0;
    Eigen::VectorXd est = unconditional_gc_estimate(cause, effect, cfg.max_var_order, &order);
    return assemble(cause.size(), std::move(est), order, bootstrap_threshold_unconditional(cause, effect, cfg));
}

SpectrumResult conditional_gc_spectrum(const Eigen::VectorXd& cause, const Eigen::VectorXd& effect,
                                       const Eigen::VectorXd& conditioning, const GcBootstrapConfig& cfg) {
    cfg.validate();
    int order = 0;
    Eigen::VectorXd est = conditional_gc_estimate(cause, effect, conditioning, cfg.max_var_order, &order);
    return assemble(cause.size(), std::move(est), order,
                    bootstrap_threshold_conditional(cause, effect, conditioning, cfg));
}

std::size_t SpectrumResult::n_significant_bonferroni() const {
    return static_cast<std::size_t>(std::count(sig_bonferroni.begin(), sig_bonferroni.end(), true));
}

std::size_t SpectrumResult::n_significant_alpha() const {
    return static_cast<std::size_t>(std::count(sig_alpha.begin(), sig_alpha.end(), true));
}

std::string SpectrumResult::to_csv() const {
    std::string out = "frequency_cycles_per_week,estimate,threshold_alpha,threshold_bonferroni,sig_alpha,sig_bonferroni\n";
    for (Eigen::Index i = 0; i < frequencies.size(); ++i) {
        const auto u = static_cast<std::size_t>(i);
        out += csv::format_number(frequencies(i)) + "," + csv::format_number(estimate(i)) + "," +
               csv::format_number(threshold_alpha(i)) + "," + csv::format_number(threshold_bonferroni(i)) + "," +
               (sig_alpha[u] ? "1" : "0") + "," + (sig_bonferroni[u] ? "1" : "0") + "\n";
    }
    return out;
}

}  // namespace climdem
