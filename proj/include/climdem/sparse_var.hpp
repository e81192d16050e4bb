#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "climdem/linalg.hpp"

namespace climdem {

struct LassoOptions {
    double tolerance = 1e-8;  ///< duality gap, relative to the null-model objective
    int max_sweeps = 100000;
};

/// Coordinate-descent solution of min_b (1/2n)||y - X b||^2 + lambda ||b||_1 for
/// centered y and X (covariance updates on the Gram matrix). lambda = 0 falls back
/// to least squares.
struct LassoSolution {
    Eigen::VectorXd beta;
    double duality_gap = 0.0;
    int sweeps = 0;
};

[[nodiscard]] LassoSolution solve_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                                        const LassoOptions& opts = {});

/// Max KKT violation of a candidate solution of the same problem.
[[nodiscard]] double lasso_kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& beta, double lambda);

struct SupportEntry {
    Eigen::Index equation;
    Eigen::Index variable;
    int lag;  ///< 1-based
    friend bool operator==(const SupportEntry&, const SupportEntry&) = default;
};

/// LASSO-penalized VAR. Coefficients are stored in the fitting units (standardized when
/// `standardized` is true).
struct SparseVarModel {
    int order = 0;
    double lambda = 0.0;
    bool standardized = true;
    std::vector<std::string> variable_names;
    Standardization scaling;             ///< identity (mean 0, scale 1) when not standardized
    Eigen::VectorXd intercept;           ///< K, fitting units
    std::vector<Eigen::MatrixXd> coeff;  ///< p matrices K x K, fitting units
    std::vector<double> duality_gaps;    ///< per equation

    [[nodiscard]] std::vector<SupportEntry> support() const;
    /// Coefficient of `variable` at `lag` in `equation`, converted back to data units.
    [[nodiscard]] double raw_coefficient(Eigen::Index equation, Eigen::Index variable, int lag) const;
    /// One-step prediction in data units from the last `order` rows of `history`.
    [[nodiscard]] Eigen::VectorXd predict_next(const Eigen::MatrixXd& history) const;
};

struct SparseVarData {
    Eigen::MatrixXd design;    ///< centered lag design, fitting units
    Eigen::MatrixXd response;  ///< centered responses
    Eigen::VectorXd design_mean;
    Eigen::VectorXd response_mean;
};

/// The centered per-equation problem the fit solves (exposed for oracle checks).
[[nodiscard]] SparseVarData sparse_var_problem(const Eigen::MatrixXd& data, int order, bool standardize);

[[nodiscard]] SparseVarModel fit_lasso_var(const Eigen::MatrixXd& data, int order, double lambda,
                                           bool standardize = true, std::vector<std::string> names = {},
                                           const LassoOptions& opts = {});

/// Smallest lambda giving an empty model in every equation.
[[nodiscard]] double lasso_lambda_max(const Eigen::MatrixXd& data, int order, bool standardize = true);

struct LambdaSelection {
    int min_train = 0;                       ///< first forecast origin; 0 selects 70% of T
    int step = 1;
    std::optional<Eigen::Index> target;      ///< score one equation only; all when empty
    bool standardize = true;
};

/// Rolling-origin one-step-ahead CV over `grid`; ties go to the largest lambda.
[[nodiscard]] double select_lambda(const Eigen::MatrixXd& data, int order, const std::vector<double>& grid,
                                   const LambdaSelection& scheme = {});

struct CoefficientRow {
    std::string variable;
    std::vector<double> by_lag;
};

/// Coefficient table of one equation: one row per variable, one column per lag.
[[nodiscard]] std::vector<CoefficientRow> coefficient_table(const SparseVarModel& model,
                                                            const std::string& equation_name);
[[nodiscard]] std::string coefficient_table_csv(const std::vector<CoefficientRow>& table);

}  // namespace climdem
