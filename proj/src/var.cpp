#include "climdem/var.hpp"

#include <cmath>
#include <limits>

namespace climdem {

namespace {

std::vector<std::string> default_names(std::span<const std::string> names, Eigen::Index k) {
    if (!names.empty()) return {names.begin(), names.end()};
    std::vector<std::string> out;
    for (Eigen::Index j = 0; j < k; ++j) out.push_back("y" + std::to_string(j + 1));
    return out;
}

std::vector<std::string> regressor_names(const std::vector<std::string>& vars, int p) {
    std::vector<std::string> out{"const"};
    for (int l = 1; l <= p; ++l)
        for (const auto& v : vars) out.push_back(v + ".l" + std::to_string(l));
    return out;
}

void check_inputs(const Eigen::MatrixXd& data, int max_order, std::span<const std::string> names) {
    require(max_order >= 1, ErrorKind::Config, "VAR order must be >= 1");
    require(data.allFinite(), ErrorKind::InvalidInput, "VAR input must be finite");
    const Eigen::Index t = data.rows(), k = data.cols();
    require(k >= 1, ErrorKind::Shape, "VAR needs at least one series");
    require(t > k * max_order + k + 10, ErrorKind::InsufficientData,
            "VAR needs T > K*p + K + 10 (T=" + std::to_string(t) + ", K=" + std::to_string(k) +
                ", p=" + std::to_string(max_order) + ")");
    for (Eigen::Index j = 0; j < k; ++j) {
        const double range = data.col(j).maxCoeff() - data.col(j).minCoeff();
        if (range == 0.0) {
            const std::string name = j < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(j)]
                                                                                 : "y" + std::to_string(j + 1);
            fail(ErrorKind::DegenerateInput, "series '" + name + "' is constant");
        }
    }
}

double criterion_value(const Eigen::MatrixXd& resid, Eigen::Index n_params_per_eq, InfoCriterion criterion) {
    const double n = static_cast<double>(resid.rows());
    const Eigen::MatrixXd sigma = resid.transpose() * resid / n;
    const double logdet = std::log(sigma.determinant());
    if (!std::isfinite(logdet)) return std::numeric_limits<double>::infinity();
    const double total = static_cast<double>(n_params_per_eq * resid.cols());
    const double penalty = criterion == InfoCriterion::Bic ? std::log(n) : 2.0;
    return logdet + penalty * total / n;
}

}  // namespace

Eigen::MatrixXd lagged_regressors(const Eigen::MatrixXd& endog, int p, Eigen::Index first_row,
                                  const Eigen::MatrixXd* exog) {
    const Eigen::Index t = endog.rows(), k = endog.cols();
    const Eigen::Index m = exog ? exog->cols() : 0;
    require(first_row >= p && first_row <= t, ErrorKind::Shape, "invalid first row for lagged design");
    require(!exog || exog->rows() == t, ErrorKind::Alignment, "exogenous rows differ from endogenous rows");
    const Eigen::Index n = t - first_row;
    Eigen::MatrixXd z(n, 1 + k * p + m);
    z.col(0).setOnes();
    for (int l = 1; l <= p; ++l) z.block(0, 1 + (l - 1) * k, n, k) = endog.middleRows(first_row - l, n);
    if (m > 0) z.rightCols(m) = exog->middleRows(first_row, n);
    return z;
}

VarModel fit_var_order(const Eigen::MatrixXd& data, int p, std::span<const std::string> names) {
    check_inputs(data, p, names);
    const Eigen::Index k = data.cols();
    VarModel model;
    model.order = p;
    model.variable_names = default_names(names, k);
    const Eigen::MatrixXd z = lagged_regressors(data, p, p);
    const Eigen::MatrixXd y = data.bottomRows(data.rows() - p);
    const auto reg_names = regressor_names(model.variable_names, p);
    const auto ls = least_squares(z, y, reg_names);
    model.intercept = ls.coef.row(0).transpose();
    for (int l = 0; l < p; ++l) model.coeff.push_back(ls.coef.middleRows(1 + l * k, k).transpose());
    model.residuals = ls.residuals;
    const double dof = static_cast<double>(y.rows() - z.cols());
    model.resid_cov = ls.residuals.transpose() * ls.residuals / dof;
    model.resid_cov = 0.5 * (model.resid_cov + model.resid_cov.transpose()).eval();
    model.spectral_radius = spectral_radius(companion<double>(model.coeff));
    model.bic = criterion_value(ls.residuals, z.cols(), InfoCriterion::Bic);
    return model;
}

int select_var_order(const Eigen::MatrixXd& data, int max_order, InfoCriterion criterion) {
    check_inputs(data, max_order, {});
    const Eigen::MatrixXd y = data.bottomRows(data.rows() - max_order);
    int best = 1;
    double best_value = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= max_order; ++p) {
        const Eigen::MatrixXd z = lagged_regressors(data, p, max_order);
        const auto ls = least_squares(z, y);
        const double value = criterion_value(ls.residuals, z.cols(), criterion);
        if (value < best_value) {
            best_value = value;
            best = p;
        }
    }
    return best;
}

VarModel fit_var(const Eigen::MatrixXd& data, int max_order, InfoCriterion criterion, std::span<const std::string> names) {
    check_inputs(data, max_order, names);
    return fit_var_order(data, select_var_order(data, max_order, criterion), names);
}

Eigen::MatrixXcd lag_polynomial(std::span<const Eigen::MatrixXd> coeff, double omega) {
    const Eigen::Index k = coeff.empty() ? 0 : coeff.front().rows();
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(k, k);
    for (std::size_t l = 0; l < coeff.size(); ++l) {
        const std::complex<double> z = std::polar(1.0, -omega * static_cast<double>(l + 1));
        a -= z * coeff[l].cast<std::complex<double>>();
    }
    return a;
}

Eigen::MatrixXd simulate_var(const Eigen::VectorXd& intercept, std::span<const Eigen::MatrixXd> coeff,
                             const Eigen::MatrixXd& initial, const Eigen::MatrixXd& innovations) {
    const auto p = static_cast<Eigen::Index>(coeff.size());
    const Eigen::Index k = intercept.size();
    require(initial.rows() >= p && initial.cols() == k, ErrorKind::Shape, "simulate_var: bad initial block");
    const Eigen::Index n0 = initial.rows();
    Eigen::MatrixXd y(n0 + innovations.rows(), k);
    y.topRows(n0) = initial;
    for (Eigen::Index t = n0; t < y.rows(); ++t) {
        Eigen::VectorXd v = intercept + innovations.row(t - n0).transpose();
        for (Eigen::Index l = 0; l < p; ++l) v.noalias() += coeff[static_cast<std::size_t>(l)] * y.row(t - l - 1).transpose();
        y.row(t) = v.transpose();
    }
    return y;
}

Eigen::MatrixXd gaussian_innovations(Eigen::Index n, const Eigen::MatrixXd& cov, Rng& rng) {
    const Eigen::MatrixXd l = cov.llt().matrixL();
    NormalSampler normal;
    Eigen::MatrixXd z(n, cov.rows());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < cov.rows(); ++j) z(i, j) = normal(rng);
    return z * l.transpose();
}

}  // namespace climdem
