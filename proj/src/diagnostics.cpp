#include "climdem/diagnostics.hpp"

#include <algorithm>
#include <string>

#include "climdem/error.hpp"
#include "climdem/parallel.hpp"
#include "climdem/random.hpp"

namespace climdem {

void DiagnosticConfig::validate(Eigen::Index n_rows) const {
    std::vector<std::string> problems;
    if (lags < 1) problems.emplace_back("lags must be >= 1");
    if (n_replicates < 1) problems.emplace_back("n_replicates must be >= 1");
    if (n_rows <= 2 * static_cast<Eigen::Index>(lags) + 1)
        problems.emplace_back("need more than 2*lags+1 residual rows (have " + std::to_string(n_rows) + ")");
    if (!problems.empty()) {
        std::string msg = "invalid diagnostic config:";
        for (const auto& p : problems) msg += " " + p + ";";
        fail(ErrorKind::Config, msg);
    }
}

double portmanteau_statistic(const Eigen::MatrixXd& residuals, int lags) {
    const Eigen::Index t = residuals.rows();
    const Eigen::MatrixXd u = residuals.rowwise() - residuals.colwise().mean();
    const double n = static_cast<double>(t);
    const Eigen::MatrixXd c0 = u.transpose() * u / n;
    const Eigen::LDLT<Eigen::MatrixXd> c0inv(c0);
    require(c0inv.info() == Eigen::Success && c0.diagonal().minCoeff() > 0.0, ErrorKind::DegenerateInput,
            "residual covariance is singular");
    double q = 0.0;
    for (int h = 1; h <= lags; ++h) {
        const Eigen::MatrixXd ch = u.bottomRows(t - h).transpose() * u.topRows(t - h) / n;
        const Eigen::MatrixXd a = c0inv.solve(ch);                // C0^-1 C_h
        const Eigen::MatrixXd b = c0inv.solve(ch.transpose());    // C0^-1 C_h'
        q += (b * a).trace();  // tr(C_h' C0^-1 C_h C0^-1) by cyclic rotation
    }
    return n * q;
}

double arch_lm_statistic(const Eigen::VectorXd& residual, int lags) {
    const Eigen::Index t = residual.size();
    const Eigen::VectorXd e2 = (residual.array() - residual.mean()).square().matrix();
    const Eigen::Index n = t - lags;
    Eigen::MatrixXd x(n, 1 + lags);
    x.col(0).setOnes();
    for (int l = 1; l <= lags; ++l) x.col(l) = e2.segment(lags - l, n);
    const Eigen::VectorXd y = e2.tail(n);
    const double sst = (y.array() - y.mean()).square().sum();
    if (!(sst > 0.0)) return 0.0;
    const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
    const double sse = (y - x * beta).squaredNorm();
    return static_cast<double>(n) * std::max(0.0, 1.0 - sse / sst);
}

namespace {

Eigen::MatrixXd resample_rows(const Eigen::MatrixXd& pool, Rng& rng) {
    Eigen::MatrixXd out(pool.rows(), pool.cols());
    for (Eigen::Index i = 0; i < pool.rows(); ++i)
        out.row(i) = pool.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(pool.rows()))));
    return out;
}

double empirical_p(const std::vector<double>& stats, double observed) {
    const auto exceed = std::count_if(stats.begin(), stats.end(), [&](double s) { return s >= observed; });
    return (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(stats.size()));
}

}  // namespace

DiagnosticResult portmanteau_test(const Eigen::MatrixXd& residuals, const DiagnosticConfig& cfg) {
    cfg.validate(residuals.rows());
    require(residuals.allFinite(), ErrorKind::InvalidInput, "residuals must be finite");
    DiagnosticResult res;
    res.lags = cfg.lags;
    res.statistic = portmanteau_statistic(residuals, cfg.lags);
    std::vector<double> stats(static_cast<std::size_t>(cfg.n_replicates));
    parallel_for(stats.size(), [&](std::size_t b) {
        Rng rng = make_rng(substream(cfg.seed, static_cast<std::uint64_t>(b)));
        stats[b] = portmanteau_statistic(resample_rows(residuals, rng), cfg.lags);
    });
    res.p_value = empirical_p(stats, res.statistic);
    return res;
}

DiagnosticResult arch_lm_test(const Eigen::MatrixXd& residuals, const DiagnosticConfig& cfg) {
    cfg.validate(residuals.rows());
    require(residuals.allFinite(), ErrorKind::InvalidInput, "residuals must be finite");
    const Eigen::Index k = residuals.cols();
    DiagnosticResult res;
    res.lags = cfg.lags;
    std::vector<double> observed(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) observed[static_cast<std::size_t>(j)] = arch_lm_statistic(residuals.col(j), cfg.lags);
    std::vector<std::vector<double>> stats(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(cfg.n_replicates)));
    parallel_for(static_cast<std::size_t>(cfg.n_replicates), [&](std::size_t b) {
        Rng rng = make_rng(substream(cfg.seed, static_cast<std::uint64_t>(b)));
        const Eigen::MatrixXd draw = resample_rows(residuals, rng);
        for (Eigen::Index j = 0; j < k; ++j) stats[static_cast<std::size_t>(j)][b] = arch_lm_statistic(draw.col(j), cfg.lags);
    });
    double min_p = 1.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        const double p = empirical_p(stats[static_cast<std::size_t>(j)], observed[static_cast<std::size_t>(j)]);
        res.equation_p_values.push_back(p);
        min_p = std::min(min_p, p);
    }
    res.statistic = *std::max_element(observed.begin(), observed.end());
    res.p_value = std::min(1.0, static_cast<double>(k) * min_p);
    return res;
}

}  // namespace climdem
