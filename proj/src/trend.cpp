#include "climdem/trend.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "climdem/linalg.hpp"
#include "climdem/sparse_var.hpp"

namespace climdem {

void TrendFitConfig::validate() const {
    std::vector<std::string> problems;
    if (n_changepoints < 0) problems.emplace_back("n_changepoints must be >= 0");
    if (n_harmonics < 0) problems.emplace_back("n_harmonics must be >= 0");
    if (!(period > 0.0)) problems.emplace_back("period must be > 0");
    if (!(changepoint_range > 0.0 && changepoint_range <= 1.0)) problems.emplace_back("changepoint_range must lie in (0, 1]");
    if (changepoint_penalty && !(*changepoint_penalty >= 0.0)) problems.emplace_back("changepoint_penalty must be >= 0");
    if (!(tolerance > 0.0)) problems.emplace_back("tolerance must be > 0");
    if (!problems.empty()) {
        std::string msg = "invalid trend config:";
        for (const auto& p : problems) msg += " " + p + ";";
        fail(ErrorKind::Config, msg);
    }
}

double TrendModel::trend(double t) const {
    double rate = base_rate, offset = base_offset;
    for (std::size_t j = 0; j < changepoints.size(); ++j) {
        if (t >= changepoints[j]) {
            rate += rate_adjustments[j];
            offset += offset_corrections[j];
        }
    }
    return rate * t + offset;
}

double TrendModel::seasonal(double t) const {
    double s = 0.0;
    for (Eigen::Index n = 0; n < cos_coeffs.size(); ++n) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(n + 1) * t / period;
        s += cos_coeffs(n) * std::cos(w) + sin_coeffs(n) * std::sin(w);
    }
    return s;
}

std::vector<double> changepoint_grid(Eigen::Index n, int count, double range) {
    std::vector<double> out;
    if (count <= 0) return out;
    const double span = std::floor(range * static_cast<double>(n)) - 1.0;
    for (int j = 1; j <= count; ++j) out.push_back(std::round(static_cast<double>(j) * span / count));
    return out;
}

namespace {

Eigen::MatrixXd unpenalized_design(Eigen::Index n, int harmonics, double period) {
    Eigen::MatrixXd u(n, 2 + 2 * harmonics);
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto tt = static_cast<double>(t);
        u(t, 0) = 1.0;
        u(t, 1) = tt;
        for (int h = 0; h < harmonics; ++h) {
            const double w = 2.0 * std::numbers::pi * (h + 1) * tt / period;
            u(t, 2 + 2 * h) = std::cos(w);
            u(t, 3 + 2 * h) = std::sin(w);
        }
    }
    return u;
}

Eigen::MatrixXd hinge_design(Eigen::Index n, const std::vector<double>& cps) {
    Eigen::MatrixXd z(n, static_cast<Eigen::Index>(cps.size()));
    for (Eigen::Index t = 0; t < n; ++t)
        for (std::size_t j = 0; j < cps.size(); ++j)
            z(t, static_cast<Eigen::Index>(j)) = std::max(0.0, static_cast<double>(t) - cps[j]);
    return z;
}

}  // namespace

TrendModel fit_trend_model(const Eigen::VectorXd& y, const TrendFitConfig& cfg) {
    cfg.validate();
    require(y.allFinite(), ErrorKind::InvalidInput, "trend input must be finite");
    const Eigen::Index n = y.size();
    require(n >= 3, ErrorKind::InsufficientData, "trend fit needs at least 3 observations");
    TrendModel model;
    model.period = cfg.period;
    model.n_train = n;
    model.seasonality_identifiable = static_cast<double>(n) >= cfg.period;
    model.changepoint_penalty = cfg.changepoint_penalty ? *cfg.changepoint_penalty : 10.0 * stddev(y);

    // Harmonics beyond what the sample can identify are dropped rather than left singular.
    int harmonics = cfg.n_harmonics;
    if (!model.seasonality_identifiable)
        harmonics = std::min<int>(harmonics, static_cast<int>((n - 3) / 2));
    harmonics = std::min<int>(harmonics, static_cast<int>(std::floor((cfg.period - 1.0) / 2.0)));
    harmonics = std::max(harmonics, 0);

    std::vector<double> cps = changepoint_grid(n, cfg.n_changepoints, cfg.changepoint_range);
    std::erase_if(cps, [](double s) { return s <= 0.0; });
    model.changepoints = cps;
    const Eigen::MatrixXd u = unpenalized_design(n, harmonics, cfg.period);
    const Eigen::MatrixXd z = hinge_design(n, cps);

    // Profile out the unpenalized block exactly, then run the l1 problem on the residual design.
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(z.cols());
    if (z.cols() > 0) {
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(u);
        const Eigen::MatrixXd zr = z - u * qr.solve(z);
        const Eigen::VectorXd yr = y - u * qr.solve(y);
        // sum r^2 + pen |d|  ==  2n [ (1/2n) sum r^2 + (pen / 2n) |d| ]
        const double lambda = model.changepoint_penalty / (2.0 * static_cast<double>(n));
        if (lambda == 0.0) {
            delta = zr.colPivHouseholderQr().solve(yr);
        } else {
            LassoOptions opts;
            opts.tolerance = cfg.tolerance;
            delta = solve_lasso(zr, yr, lambda, opts).beta;
        }
    }
    const Eigen::VectorXd base = least_squares(u, y - z * delta).coef.col(0);
    model.base_offset = base(0);
    model.base_rate = base(1);
    model.cos_coeffs = Eigen::VectorXd::Zero(harmonics);
    model.sin_coeffs = Eigen::VectorXd::Zero(harmonics);
    for (int h = 0; h < harmonics; ++h) {
        model.cos_coeffs(h) = base(2 + 2 * h);
        model.sin_coeffs(h) = base(3 + 2 * h);
    }
    for (std::size_t j = 0; j < cps.size(); ++j) {
        model.rate_adjustments.push_back(delta(static_cast<Eigen::Index>(j)));
        model.offset_corrections.push_back(-cps[j] * delta(static_cast<Eigen::Index>(j)));
    }
    const Eigen::VectorXd resid = y - fitted_values(model);
    model.noise_sigma = stddev(resid);
    return model;
}

double trend_objective(const TrendModel& model, const Eigen::VectorXd& y) {
    require(y.size() == model.n_train, ErrorKind::Shape, "series length differs from the training length");
    double l1 = 0.0;
    for (double d : model.rate_adjustments) l1 += std::abs(d);
    return (y - fitted_values(model)).squaredNorm() + model.changepoint_penalty * l1;
}

Eigen::VectorXd fitted_values(const TrendModel& model, Eigen::Index begin, Eigen::Index end) {
    require(end >= begin, ErrorKind::InvalidInput, "empty or reversed time range");
    Eigen::VectorXd out(end - begin);
    for (Eigen::Index t = begin; t < end; ++t) {
        const auto tt = static_cast<double>(t);
        out(t - begin) = model.trend(tt) + model.seasonal(tt);
    }
    return out;
}

Eigen::VectorXd fitted_values(const TrendModel& model) { return fitted_values(model, 0, model.n_train); }

Eigen::VectorXd forecast(const TrendModel& model, Eigen::Index horizon) {
    require(horizon >= 1, ErrorKind::Config, "forecast horizon must be >= 1");
    return fitted_values(model, model.n_train, model.n_train + horizon);
}

}  // namespace climdem
