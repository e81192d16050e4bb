#include "climdem/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "climdem/csv.hpp"
#include "climdem/parallel.hpp"

namespace climdem {

SupervisedDataset lagged_design_matrix(const PanelDataset& panel, const std::string& target, int lags,
                                       const std::vector<std::string>& extra_columns) {
    require(lags >= 1, ErrorKind::Config, "lags must be >= 1");
    if (!panel.has(target)) fail(ErrorKind::Lookup, "unknown column '" + target + "'");
    for (const auto& e : extra_columns)
        if (!panel.has(e)) fail(ErrorKind::Lookup, "unknown column '" + e + "'");
    const Eigen::Index t = panel.length();
    require(t > lags, ErrorKind::InsufficientData, "panel length must exceed the number of lags");

    std::vector<std::string> lagged{target};
    for (const auto& name : panel.names())
        if (name != target && std::find(extra_columns.begin(), extra_columns.end(), name) == extra_columns.end())
            lagged.push_back(name);

    SupervisedDataset out;
    const Eigen::Index n = t - lags;
    const auto f = static_cast<Eigen::Index>(lagged.size() * static_cast<std::size_t>(lags) + extra_columns.size());
    out.features.resize(n, f);
    Eigen::Index col = 0;
    for (const auto& name : lagged) {
        const auto& v = panel.column(name);
        for (int l = 1; l <= lags; ++l) {
            out.features.col(col++) = v.segment(lags - l, n);
            out.feature_names.push_back(name + "_lag" + std::to_string(l));
        }
    }
    for (const auto& name : extra_columns) {
        out.features.col(col++) = panel.column(name).tail(n);
        out.feature_names.push_back(name);
    }
    out.target = panel.column(target).tail(n);
    out.week_starts.assign(panel.week_starts().begin() + lags, panel.week_starts().end());
    return out;
}

Eigen::VectorXd lagged_feature_row(const Eigen::MatrixXd& lag_history, int lags, const Eigen::VectorXd& extras) {
    require(lag_history.rows() >= lags, ErrorKind::InsufficientData, "not enough history for the lags");
    const Eigen::Index k = lag_history.cols();
    Eigen::VectorXd x(k * lags + extras.size());
    Eigen::Index col = 0;
    for (Eigen::Index j = 0; j < k; ++j)
        for (int l = 1; l <= lags; ++l) x(col++) = lag_history(lag_history.rows() - l, j);
    x.tail(extras.size()) = extras;
    return x;
}

BlockDraw mbb_indices(Eigen::Index n_rows, Eigen::Index block_length, Rng& rng) {
    require(block_length >= 1, ErrorKind::Config, "block length must be >= 1");
    if (block_length > n_rows)
        fail(ErrorKind::Config, "block length " + std::to_string(block_length) + " exceeds the " +
                                    std::to_string(n_rows) + " available rows");
    BlockDraw draw;
    draw.n_candidate_blocks = n_rows - block_length + 1;
    const Eigen::Index k = (n_rows + block_length - 1) / block_length;
    draw.rows.reserve(static_cast<std::size_t>(k * block_length));
    for (Eigen::Index b = 0; b < k; ++b) {
        const auto start = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(draw.n_candidate_blocks)));
        draw.block_starts.push_back(start);
        for (Eigen::Index i = 0; i < block_length; ++i) draw.rows.push_back(start + i);
    }
    draw.rows_before_truncation = static_cast<Eigen::Index>(draw.rows.size());
    draw.rows.resize(static_cast<std::size_t>(n_rows));
    return draw;
}

SupervisedDataset mbb_resample(const SupervisedDataset& data, Eigen::Index block_length, Rng& rng) {
    const auto draw = mbb_indices(data.rows(), block_length, rng);
    SupervisedDataset out;
    out.feature_names = data.feature_names;
    out.features.resize(data.rows(), data.n_features());
    out.target.resize(data.rows());
    for (std::size_t i = 0; i < draw.rows.size(); ++i) {
        const auto r = draw.rows[i];
        out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(r);
        out.target(static_cast<Eigen::Index>(i)) = data.target(r);
        if (!data.week_starts.empty()) out.week_starts.push_back(data.week_starts[static_cast<std::size_t>(r)]);
    }
    return out;
}

void ForestConfig::validate(Eigen::Index n_rows) const {
    std::vector<std::string> problems;
    if (n_trees < 1) problems.emplace_back("n_trees must be >= 1");
    if (mtry < 0) problems.emplace_back("mtry must be >= 1 (or 0 for the default)");
    if (min_node_size < 1) problems.emplace_back("min_node_size must be >= 1");
    if (block_length < 1 || block_length > n_rows)
        problems.emplace_back("block_length must lie in [1, " + std::to_string(n_rows) + "]");
    if (!problems.empty()) {
        std::string msg = "invalid forest config:";
        for (const auto& p : problems) msg += " " + p + ";";
        fail(ErrorKind::Config, msg);
    }
}

double RegressionTree::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(node)];
        node = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
}

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double child_sse = std::numeric_limits<double>::infinity();
};

struct TreeBuilder {
    const Eigen::MatrixXd& x;
    const Eigen::VectorXd& y;
    int mtry;
    int min_node_size;
    Rng& rng;
    std::vector<double>& importance;
    RegressionTree tree;

    std::vector<int> candidates;
    std::vector<std::pair<double, double>> sorted;

    void grow(std::vector<Eigen::Index> rows) {
        struct Pending {
            int node;
            std::vector<Eigen::Index> rows;
        };
        std::vector<Pending> stack;
        tree.nodes.push_back({});
        stack.push_back({0, std::move(rows)});
        while (!stack.empty()) {
            Pending p = std::move(stack.back());
            stack.pop_back();
            const auto n = static_cast<double>(p.rows.size());
            double sum = 0.0;
            for (auto r : p.rows) sum += y(r);
            const double mu = sum / n;
            tree.nodes[static_cast<std::size_t>(p.node)].value = mu;
            bool constant = true;
            double sse = 0.0;
            for (auto r : p.rows) {
                constant = constant && y(r) == y(p.rows.front());
                sse += (y(r) - mu) * (y(r) - mu);
            }
            if (constant || static_cast<int>(p.rows.size()) <= min_node_size) continue;
            const Split s = best_split(p.rows, mu);
            if (s.feature < 0) continue;
            std::vector<Eigen::Index> left, right;
            for (auto r : p.rows) (x(r, s.feature) <= s.threshold ? left : right).push_back(r);
            importance[static_cast<std::size_t>(s.feature)] += std::max(0.0, sse - s.child_sse);
            const int li = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            tree.nodes.push_back({});
            auto& node = tree.nodes[static_cast<std::size_t>(p.node)];
            node.feature = s.feature;
            node.threshold = s.threshold;
            node.left = li;
            node.right = li + 1;
            stack.push_back({li + 1, std::move(right)});
            stack.push_back({li, std::move(left)});
        }
    }

    Split best_split(const std::vector<Eigen::Index>& rows, double mu) {
        const auto f = static_cast<int>(x.cols());
        // Partial Fisher-Yates: the first mtry entries are a uniform sample without replacement.
        candidates.resize(static_cast<std::size_t>(f));
        std::iota(candidates.begin(), candidates.end(), 0);
        for (int i = 0; i < mtry; ++i) {
            const auto j = i + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(f - i)));
            std::swap(candidates[static_cast<std::size_t>(i)], candidates[static_cast<std::size_t>(j)]);
        }
        Split best;
        const auto n = rows.size();
        for (int c = 0; c < mtry; ++c) {
            const int feat = candidates[static_cast<std::size_t>(c)];
            sorted.clear();
            double total = 0.0, total_sq = 0.0;
            for (auto r : rows) {
                const double d = y(r) - mu;
                sorted.emplace_back(x(r, feat), d);
                total += d;
                total_sq += d * d;
            }
            std::sort(sorted.begin(), sorted.end());
            double left_sum = 0.0, left_sq = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += sorted[i].second;
                left_sq += sorted[i].second * sorted[i].second;
                if (sorted[i].first == sorted[i + 1].first) continue;
                const auto nl = static_cast<double>(i + 1);
                const auto nr = static_cast<double>(n - i - 1);
                const double right_sum = total - left_sum;
                const double child = (left_sq - left_sum * left_sum / nl) + (total_sq - left_sq - right_sum * right_sum / nr);
                double threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
                // neighbouring doubles: the midpoint rounds up and would empty the right child
                if (!(threshold < sorted[i + 1].first)) threshold = sorted[i].first;
                const bool better = child < best.child_sse ||
                                    (child == best.child_sse &&
                                     (feat < best.feature || (feat == best.feature && threshold < best.threshold)));
                if (better) best = {feat, threshold, child};
            }
        }
        return best;
    }
};

}  // namespace

ForestModel train_forest(const SupervisedDataset& data, const ForestConfig& cfg) {
    require(data.rows() > 0, ErrorKind::EmptyInput, "empty training dataset");
    require(data.features.allFinite() && data.target.allFinite(), ErrorKind::InvalidInput,
            "training data must be finite");
    cfg.validate(data.rows());
    const auto f = data.n_features();
    require(f >= 1, ErrorKind::InvalidInput, "training data has no features");
    const int mtry = cfg.mtry > 0 ? std::min<int>(cfg.mtry, static_cast<int>(f))
                                  : static_cast<int>((f + 2) / 3);
    const auto b = static_cast<std::size_t>(cfg.n_trees);
    ForestModel model;
    model.feature_names = data.feature_names;
    model.trees.resize(b);
    model.block_starts.resize(b);
    model.in_bag.resize(b);
    std::vector<std::vector<double>> importance(b, std::vector<double>(static_cast<std::size_t>(f), 0.0));
    parallel_for(b, [&](std::size_t i) {
        Rng rng = make_rng(substream(cfg.seed, static_cast<std::uint64_t>(i)));
        auto draw = mbb_indices(data.rows(), cfg.block_length, rng);
        std::vector<bool> bag(static_cast<std::size_t>(data.rows()), false);
        for (auto r : draw.rows) bag[static_cast<std::size_t>(r)] = true;
        TreeBuilder builder{data.features, data.target, mtry, cfg.min_node_size, rng, importance[i], {}, {}, {}};
        builder.grow(std::move(draw.rows));
        model.trees[i] = std::move(builder.tree);
        model.block_starts[i] = std::move(draw.block_starts);
        model.in_bag[i] = std::move(bag);
    });
    model.importance_sum.assign(static_cast<std::size_t>(f), 0.0);
    for (const auto& imp : importance)
        for (std::size_t j = 0; j < imp.size(); ++j) model.importance_sum[j] += imp[j];
    return model;
}

double predict(const ForestModel& forest, const Eigen::VectorXd& x) {
    if (x.size() != forest.n_features())
        fail(ErrorKind::Shape, "feature vector has " + std::to_string(x.size()) + " entries, forest expects " +
                                   std::to_string(forest.n_features()));
    double sum = 0.0;
    for (const auto& t : forest.trees) sum += t.predict(x);
    return sum / static_cast<double>(forest.trees.size());
}

Eigen::VectorXd predict(const ForestModel& forest, const Eigen::MatrixXd& x) {
    if (x.cols() != forest.n_features())
        fail(ErrorKind::Shape, "feature matrix has " + std::to_string(x.cols()) + " columns, forest expects " +
                                   std::to_string(forest.n_features()));
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict(forest, Eigen::VectorXd(x.row(i).transpose()));
    return out;
}

std::vector<std::pair<std::string, double>> impurity_importance(const ForestModel& forest) {
    std::vector<std::pair<std::string, double>> out;
    const auto b = static_cast<double>(forest.trees.size());
    for (std::size_t j = 0; j < forest.feature_names.size(); ++j)
        out.emplace_back(forest.feature_names[j], forest.importance_sum[j] / b);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& c) { return a.second > c.second; });
    return out;
}

std::string importance_csv(const std::vector<std::pair<std::string, double>>& ranking) {
    std::string out = "feature,score\n";
    for (const auto& [name, score] : ranking) out += name + "," + csv::format_number(score) + "\n";
    return out;
}

OobReport oob_metrics(const ForestModel& forest, const SupervisedDataset& data) {
    require(data.n_features() == forest.n_features(), ErrorKind::Shape, "dataset does not match the forest's features");
    const Eigen::Index n = data.rows();
    for (const auto& bag : forest.in_bag)
        require(static_cast<Eigen::Index>(bag.size()) == n, ErrorKind::Shape, "dataset is not the training dataset");
    OobReport rep;
    rep.predictions = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<Eigen::Index> used;
    for (Eigen::Index i = 0; i < n; ++i) {
        double sum = 0.0;
        int count = 0;
        for (std::size_t b = 0; b < forest.trees.size(); ++b) {
            if (forest.in_bag[b][static_cast<std::size_t>(i)]) continue;
            sum += forest.trees[b].predict(data.features.row(i).transpose());
            ++count;
        }
        if (count == 0) continue;
        rep.predictions(i) = sum / count;
        used.push_back(i);
    }
    rep.n_oob = static_cast<Eigen::Index>(used.size());
    rep.n_excluded = n - rep.n_oob;
    if (rep.n_oob == 0)
        fail(ErrorKind::Diagnostics, "no out-of-bag rows: use a smaller block length or more trees");
    Eigen::VectorXd actual(rep.n_oob), pred(rep.n_oob);
    for (Eigen::Index k = 0; k < rep.n_oob; ++k) {
        actual(k) = data.target(used[static_cast<std::size_t>(k)]);
        pred(k) = rep.predictions(used[static_cast<std::size_t>(k)]);
    }
    const double sse = (actual - pred).squaredNorm();
    const double sst = (actual.array() - actual.mean()).square().sum();
    rep.rmse = std::sqrt(sse / static_cast<double>(rep.n_oob));
    if (sst > 0.0) {
        rep.rsr = std::sqrt(sse / sst);
        rep.r2 = 1.0 - sse / sst;
    } else {
        rep.rsr = std::numeric_limits<double>::quiet_NaN();
        rep.r2 = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

std::string oob_json(const OobReport& report) {
    nlohmann::ordered_json j{{"rmse", report.rmse},
                             {"rsr", report.rsr},
                             {"r2", report.r2},
                             {"n_oob", report.n_oob},
                             {"n_excluded", report.n_excluded}};
    return j.dump(2) + "\n";
}

}  // namespace climdem
