#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "climdem/random.hpp"
#include "climdem/series.hpp"

namespace climdem {

/// Time-ordered supervised rows.
struct SupervisedDataset {
    Eigen::MatrixXd features;  ///< rows x F
    Eigen::VectorXd target;
    std::vector<std::string> feature_names;
    std::vector<Date> week_starts;  ///< week of each target row

    [[nodiscard]] Eigen::Index rows() const noexcept { return target.size(); }
    [[nodiscard]] Eigen::Index n_features() const noexcept { return features.cols(); }
};

/// Features per row t: target lags 1..lags, every other panel column (except extras)
/// at lags 1..lags, then the extra columns at t. Names are `<column>_lag<l>`.
[[nodiscard]] SupervisedDataset lagged_design_matrix(const PanelDataset& panel, const std::string& target, int lags = 4,
                                                     const std::vector<std::string>& extra_columns = {});

/// Feature vector for the row that would follow `history` (last `lags` rows used),
/// with extras supplied for the new row.
[[nodiscard]] Eigen::VectorXd lagged_feature_row(const Eigen::MatrixXd& lag_history, int lags,
                                                 const Eigen::VectorXd& extras);

struct BlockDraw {
    std::vector<Eigen::Index> block_starts;  ///< K draws in draw order
    std::vector<Eigen::Index> rows;          ///< concatenated, truncated to T
    Eigen::Index n_candidate_blocks = 0;
    Eigen::Index rows_before_truncation = 0;
};

[[nodiscard]] BlockDraw mbb_indices(Eigen::Index n_rows, Eigen::Index block_length, Rng& rng);
[[nodiscard]] SupervisedDataset mbb_resample(const SupervisedDataset& data, Eigen::Index block_length, Rng& rng);

struct ForestConfig {
    int n_trees = 1000;
    int mtry = 0;  ///< 0 selects ceil(F/3)
    int min_node_size = 5;
    Eigen::Index block_length = 52;
    std::uint64_t seed = 0;
    void validate(Eigen::Index n_rows) const;
};

struct TreeNode {
    int feature = -1;  ///< -1 for leaves
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;  ///< mean training target under this node
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  ///< root at 0
    [[nodiscard]] double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

struct ForestModel {
    std::vector<RegressionTree> trees;
    std::vector<std::vector<Eigen::Index>> block_starts;  ///< per tree
    std::vector<std::vector<bool>> in_bag;                ///< per tree, by original row
    std::vector<std::string> feature_names;
    std::vector<double> importance_sum;  ///< total impurity reduction per feature over all trees

    [[nodiscard]] Eigen::Index n_features() const noexcept { return static_cast<Eigen::Index>(feature_names.size()); }
};

[[nodiscard]] ForestModel train_forest(const SupervisedDataset& data, const ForestConfig& cfg);

/// Mean of the tree outputs.
[[nodiscard]] double predict(const ForestModel& forest, const Eigen::VectorXd& x);
[[nodiscard]] Eigen::VectorXd predict(const ForestModel& forest, const Eigen::MatrixXd& x);

/// (feature, score) sorted by descending score; ties keep feature order.
[[nodiscard]] std::vector<std::pair<std::string, double>> impurity_importance(const ForestModel& forest);
[[nodiscard]] std::string importance_csv(const std::vector<std::pair<std::string, double>>& ranking);

struct OobReport {
    double rmse = 0.0;
    double rsr = 0.0;
    double r2 = 0.0;
    Eigen::Index n_oob = 0;
    Eigen::Index n_excluded = 0;  ///< rows in-bag for every tree
    Eigen::VectorXd predictions;  ///< NaN for excluded rows
};

[[nodiscard]] OobReport oob_metrics(const ForestModel& forest, const SupervisedDataset& data);
[[nodiscard]] std::string oob_json(const OobReport& report);

}  // namespace climdem
