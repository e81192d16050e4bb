#include "climdem/sparse_var.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "climdem/csv.hpp"
#include "climdem/var.hpp"

namespace climdem {

namespace {

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

double primal(const Eigen::VectorXd& r, const Eigen::VectorXd& beta, double lambda, double n) {
    return 0.5 * r.squaredNorm() / n + lambda * beta.lpNorm<1>();
}

double duality_gap(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta, double lambda) {
    const double n = static_cast<double>(y.size());
    const Eigen::VectorXd r = y - x * beta;
    const double corr = x.size() == 0 ? 0.0 : (x.transpose() * r).cwiseAbs().maxCoeff() / n;
    const double s = corr > lambda ? lambda / corr : 1.0;
    const Eigen::VectorXd theta = s * r / n;
    const double dual = 0.5 * y.squaredNorm() / n - 0.5 * n * (y / n - theta).squaredNorm();
    return primal(r, beta, lambda, n) - dual;
}

// Feature-sign search from a coordinate-descent start: on the current support with fixed signs the
// stationarity conditions G_AA b = c_A - lambda s_A are linear, so solve them exactly, stop at the
// first sign change along the way (the objective falls monotonically on that segment), and admit
// the worst KKT violator when the support is optimal. Returns false if a support system is singular.
bool refine_active_set(const Eigen::MatrixXd& gram, const Eigen::VectorXd& c, double lambda, Eigen::VectorXd& beta) {
    const Eigen::Index p = beta.size();
    Eigen::VectorXd sign = beta.array().sign().matrix();
    const int max_iter = 20 * static_cast<int>(p) + 100;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<Eigen::Index> active;
        for (Eigen::Index j = 0; j < p; ++j)
            if (sign(j) != 0.0) active.push_back(j);
        const auto a = static_cast<Eigen::Index>(active.size());
        Eigen::VectorXd target = beta;
        if (a > 0) {
            Eigen::MatrixXd g(a, a);
            Eigen::VectorXd rhs(a);
            for (Eigen::Index i = 0; i < a; ++i) {
                rhs(i) = c(active[i]) - lambda * sign(active[i]);
                for (Eigen::Index k = 0; k < a; ++k) g(i, k) = gram(active[i], active[k]);
            }
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
            if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-12 * ldlt.vectorD().maxCoeff()))
                return false;
            const Eigen::VectorXd b = ldlt.solve(rhs);
            target.setZero();
            for (Eigen::Index i = 0; i < a; ++i) target(active[i]) = b(i);
        }
        // walk from beta to target, stopping where an active coefficient first crosses zero
        double step = 1.0;
        Eigen::Index crossing = -1;
        for (Eigen::Index j : active) {
            if (target(j) * sign(j) > 0.0) continue;
            const double t = beta(j) / (beta(j) - target(j));
            if (t < step) {
                step = t;
                crossing = j;
            }
        }
        if (crossing >= 0) {
            beta += step * (target - beta);
            beta(crossing) = 0.0;
            sign(crossing) = 0.0;
            for (Eigen::Index j : active)
                if (beta(j) * sign(j) <= 0.0) {
                    beta(j) = 0.0;
                    sign(j) = 0.0;
                }
            continue;
        }
        beta = target;
        const Eigen::VectorXd grad = c - gram * beta;
        Eigen::Index worst = -1;
        double worst_value = lambda * (1.0 + 1e-12);
        for (Eigen::Index j = 0; j < p; ++j)
            if (sign(j) == 0.0 && std::abs(grad(j)) > worst_value) {
                worst_value = std::abs(grad(j));
                worst = j;
            }
        if (worst < 0) return true;
        sign(worst) = grad(worst) > 0.0 ? 1.0 : -1.0;
    }
    return false;
}

}  // namespace

LassoSolution solve_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, const LassoOptions& opts) {
    require(lambda >= 0.0 && std::isfinite(lambda), ErrorKind::Config, "lambda must be a finite value >= 0");
    require(x.rows() == y.size(), ErrorKind::Shape, "lasso: design and response lengths differ");
    const Eigen::Index p = x.cols();
    const double n = static_cast<double>(y.size());
    LassoSolution sol;
    if (lambda == 0.0) {
        sol.beta = least_squares(x, y).coef.col(0);
        return sol;
    }
    const Eigen::MatrixXd gram = x.transpose() * x / n;
    const Eigen::VectorXd xty = x.transpose() * y / n;
    sol.beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd grad = xty;  // X'(y - X b)/n
    const double scale = std::max(0.5 * y.squaredNorm() / n, std::numeric_limits<double>::min());
    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double gjj = gram(j, j);
            if (gjj <= 0.0) continue;
            const double old = sol.beta(j);
            const double updated = soft_threshold(grad(j) + gjj * old, lambda) / gjj;
            const double delta = updated - old;
            if (delta != 0.0) {
                sol.beta(j) = updated;
                grad.noalias() -= delta * gram.col(j);
                max_change = std::max(max_change, std::abs(delta) * std::sqrt(gjj));
            }
        }
        sol.sweeps = sweep;
        // The gap is only worth computing once coordinates have settled.
        if (max_change < 1e-6 || sweep % 50 == 0) {
            sol.duality_gap = duality_gap(x, y, sol.beta, lambda);
            if (sol.duality_gap <= opts.tolerance * scale) break;
        }
    }
    sol.duality_gap = duality_gap(x, y, sol.beta, lambda);
    // Coordinate descent crawls on strongly correlated columns; finish on the support exactly.
    Eigen::VectorXd polished = sol.beta;
    if (refine_active_set(gram, xty, lambda, polished)) {
        const double gap = duality_gap(x, y, polished, lambda);
        if (gap <= sol.duality_gap) {
            sol.beta = polished;
            sol.duality_gap = gap;
        }
    }
    if (sol.duality_gap <= opts.tolerance * scale) return sol;
    fail(ErrorKind::Convergence, "coordinate descent did not converge after " + std::to_string(opts.max_sweeps) +
                                     " sweeps (duality gap " + csv::format_number(sol.duality_gap) + ")");
}

double lasso_kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                           double lambda) {
    const double n = static_cast<double>(y.size());
    const Eigen::VectorXd g = x.transpose() * (y - x * beta) / n;  // minus gradient of the loss
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double v = beta(j) == 0.0 ? std::max(0.0, std::abs(g(j)) - lambda)
                                        : std::abs(g(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

SparseVarData sparse_var_problem(const Eigen::MatrixXd& data, int order, bool standardize) {
    require(order >= 1, ErrorKind::Config, "order must be >= 1");
    require(data.allFinite(), ErrorKind::InvalidInput, "sparse VAR input must be finite");
    const Eigen::Index t = data.rows(), k = data.cols();
    require(t > k * order + 10, ErrorKind::InsufficientData, "sparse VAR needs T > K*order + 10");
    Eigen::MatrixXd scaled = data;
    if (standardize) {
        const auto s = column_standardization(data);
        scaled = (data.rowwise() - s.mean.transpose()).array().rowwise() / s.scale.transpose().array();
    }
    const Eigen::MatrixXd z = lagged_regressors(scaled, order, order).rightCols(k * order);
    const Eigen::MatrixXd y = scaled.bottomRows(t - order);
    SparseVarData out;
    out.design_mean = z.colwise().mean().transpose();
    out.response_mean = y.colwise().mean().transpose();
    out.design = z.rowwise() - out.design_mean.transpose();
    out.response = y.rowwise() - out.response_mean.transpose();
    return out;
}

SparseVarModel fit_lasso_var(const Eigen::MatrixXd& data, int order, double lambda, bool standardize,
                             std::vector<std::string> names, const LassoOptions& opts) {
    require(lambda >= 0.0, ErrorKind::Config, "lambda must be >= 0");
    const Eigen::Index k = data.cols();
    const auto problem = sparse_var_problem(data, order, standardize);
    SparseVarModel model;
    model.order = order;
    model.lambda = lambda;
    model.standardized = standardize;
    if (names.empty())
        for (Eigen::Index j = 0; j < k; ++j) names.push_back("y" + std::to_string(j + 1));
    require(static_cast<Eigen::Index>(names.size()) == k, ErrorKind::Shape, "one name per column required");
    model.variable_names = std::move(names);
    if (standardize) {
        model.scaling = column_standardization(data);
    } else {
        model.scaling.mean = Eigen::VectorXd::Zero(k);
        model.scaling.scale = Eigen::VectorXd::Ones(k);
    }
    model.intercept.resize(k);
    model.coeff.assign(static_cast<std::size_t>(order), Eigen::MatrixXd::Zero(k, k));
    for (Eigen::Index eq = 0; eq < k; ++eq) {
        const auto sol = solve_lasso(problem.design, problem.response.col(eq), lambda, opts);
        model.duality_gaps.push_back(sol.duality_gap);
        for (int l = 0; l < order; ++l) model.coeff[static_cast<std::size_t>(l)].row(eq) = sol.beta.segment(l * k, k).transpose();
        model.intercept(eq) = problem.response_mean(eq) - problem.design_mean.dot(sol.beta);
    }
    return model;
}

double lasso_lambda_max(const Eigen::MatrixXd& data, int order, bool standardize) {
    const auto problem = sparse_var_problem(data, order, standardize);
    const double n = static_cast<double>(problem.design.rows());
    return (problem.design.transpose() * problem.response).cwiseAbs().maxCoeff() / n;
}

std::vector<SupportEntry> SparseVarModel::support() const {
    std::vector<SupportEntry> out;
    for (int l = 0; l < order; ++l) {
        const auto& a = coeff[static_cast<std::size_t>(l)];
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                if (a(i, j) != 0.0) out.push_back({i, j, l + 1});
    }
    return out;
}

double SparseVarModel::raw_coefficient(Eigen::Index equation, Eigen::Index variable, int lag) const {
    require(lag >= 1 && lag <= order, ErrorKind::Lookup, "lag out of range");
    return coeff[static_cast<std::size_t>(lag - 1)](equation, variable) * scaling.scale(equation) /
           scaling.scale(variable);
}

Eigen::VectorXd SparseVarModel::predict_next(const Eigen::MatrixXd& history) const {
    require(history.rows() >= order, ErrorKind::InsufficientData, "history shorter than the VAR order");
    Eigen::VectorXd v = intercept;
    for (int l = 1; l <= order; ++l) {
        const Eigen::VectorXd lagged = (history.row(history.rows() - l).transpose() - scaling.mean).cwiseQuotient(scaling.scale);
        v += coeff[static_cast<std::size_t>(l - 1)] * lagged;
    }
    return scaling.mean + v.cwiseProduct(scaling.scale);
}

double select_lambda(const Eigen::MatrixXd& data, int order, const std::vector<double>& grid,
                     const LambdaSelection& scheme) {
    require(!grid.empty(), ErrorKind::Config, "lambda grid is empty");
    for (double l : grid) require(l >= 0.0 && std::isfinite(l), ErrorKind::Config, "lambda grid entries must be >= 0");
    require(scheme.step >= 1, ErrorKind::Config, "CV step must be >= 1");
    if (grid.size() == 1) return grid.front();
    const Eigen::Index t = data.rows();
    const Eigen::Index first = scheme.min_train > 0 ? scheme.min_train : static_cast<Eigen::Index>(0.7 * static_cast<double>(t));
    require(first < t, ErrorKind::Config, "no forecast origins for CV");
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    double best_lambda = sorted.back();
    double best_mse = std::numeric_limits<double>::infinity();
    const Standardization global = scheme.standardize ? column_standardization(data)
                                                      : Standardization{Eigen::VectorXd::Zero(data.cols()),
                                                                        Eigen::VectorXd::Ones(data.cols())};
    // Largest lambda first so exact ties keep the sparser model.
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
        double sse = 0.0;
        std::size_t count = 0;
        for (Eigen::Index origin = first; origin < t; origin += scheme.step) {
            const Eigen::MatrixXd train = data.topRows(origin);
            const auto model = fit_lasso_var(train, order, *it, scheme.standardize);
            const Eigen::VectorXd err = (model.predict_next(train) - data.row(origin).transpose()).cwiseQuotient(global.scale);
            if (scheme.target) {
                sse += err(*scheme.target) * err(*scheme.target);
            } else {
                sse += err.squaredNorm();
            }
            ++count;
        }
        const double mse = sse / static_cast<double>(count);
        if (mse < best_mse) {
            best_mse = mse;
            best_lambda = *it;
        }
    }
    return best_lambda;
}

std::vector<CoefficientRow> coefficient_table(const SparseVarModel& model, const std::string& equation_name) {
    const auto it = std::find(model.variable_names.begin(), model.variable_names.end(), equation_name);
    if (it == model.variable_names.end()) fail(ErrorKind::Lookup, "unknown equation '" + equation_name + "'");
    const auto eq = static_cast<Eigen::Index>(it - model.variable_names.begin());
    std::vector<CoefficientRow> rows;
    for (std::size_t j = 0; j < model.variable_names.size(); ++j) {
        CoefficientRow row{model.variable_names[j], {}};
        for (int l = 0; l < model.order; ++l)
            row.by_lag.push_back(model.coeff[static_cast<std::size_t>(l)](eq, static_cast<Eigen::Index>(j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string coefficient_table_csv(const std::vector<CoefficientRow>& table) {
    std::string out = "variable";
    const std::size_t lags = table.empty() ? 0 : table.front().by_lag.size();
    for (std::size_t l = 1; l <= lags; ++l) out += ",lag" + std::to_string(l);
    out += "\n";
    for (const auto& row : table) {
        out += row.variable;
        for (double v : row.by_lag) out += "," + csv::format_number(v);
        out += "\n";
    }
    return out;
}

}  // namespace climdem
