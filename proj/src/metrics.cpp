#include "climdem/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "climdem/csv.hpp"

namespace climdem {

namespace {

void check_pair(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
    require(actual.size() == predicted.size(), ErrorKind::Shape, "actual and predicted lengths differ");
    require(actual.size() > 0, ErrorKind::EmptyInput, "no observations to score");
    require(actual.allFinite() && predicted.allFinite(), ErrorKind::InvalidInput, "metric inputs must be finite");
}

struct SquaredErrors {
    double sse = 0.0;
    double sst = 0.0;
};

SquaredErrors squared_errors(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted, double train_mean) {
    check_pair(actual, predicted);
    SquaredErrors out{(actual - predicted).squaredNorm(), (actual.array() - train_mean).square().sum()};
    if (out.sst == 0.0)
        fail(ErrorKind::MetricUndefined, "RSR undefined: all actuals equal the training mean");
    return out;
}

}  // namespace

double mape(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
    check_pair(actual, predicted);
    double total = 0.0;
    for (Eigen::Index i = 0; i < actual.size(); ++i) {
        if (actual(i) == 0.0) fail(ErrorKind::MetricUndefined, "MAPE undefined: zero actual at index " + std::to_string(i));
        total += std::abs((actual(i) - predicted(i)) / actual(i));
    }
    return 100.0 * total / static_cast<double>(actual.size());
}

double rmse(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
    check_pair(actual, predicted);
    return std::sqrt((actual - predicted).squaredNorm() / static_cast<double>(actual.size()));
}

double rsr(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted, double train_mean) {
    const auto e = squared_errors(actual, predicted, train_mean);
    return std::sqrt(e.sse / e.sst);
}

double r_squared(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted, double train_mean) {
    const auto e = squared_errors(actual, predicted, train_mean);
    return 1.0 - e.sse / e.sst;
}

double mase(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted, const Eigen::VectorXd& train, int m) {
    check_pair(actual, predicted);
    require(m >= 1, ErrorKind::Config, "seasonal lag must be >= 1");
    require(train.size() > m, ErrorKind::InsufficientData, "MASE needs a training series longer than the seasonal lag");
    const Eigen::Index n = train.size() - m;
    const double scale = (train.tail(n) - train.head(n)).cwiseAbs().sum() / static_cast<double>(n);
    if (scale == 0.0)
        fail(ErrorKind::MetricUndefined, "MASE undefined: zero seasonal-naive error over the training series (index 0)");
    return (actual - predicted).cwiseAbs().mean() / scale;
}

MetricReport evaluate_forecast(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted,
                               const Eigen::VectorXd& train, int m) {
    require(train.size() > 0, ErrorKind::EmptyInput, "empty training series");
    MetricReport r;
    r.seasonal_lag = m;
    r.train_mean = train.mean();
    const auto e = squared_errors(actual, predicted, r.train_mean);
    r.mape = mape(actual, predicted);
    r.rmse = std::sqrt(e.sse / static_cast<double>(actual.size()));
    const double ratio = e.sse / e.sst;
    r.rsr = std::sqrt(ratio);
    r.r2 = 1.0 - ratio;
    r.mase = mase(actual, predicted, train, m);
    return r;
}

void SplitSpec::validate() const {
    std::vector<std::string> problems;
    if (train_length < 1) problems.emplace_back("train_length must be >= 1");
    if (horizon < 1) problems.emplace_back("horizon must be >= 1");
    if (window < 1) problems.emplace_back("window must be >= 1");
    if (step < 1) problems.emplace_back("step must be >= 1");
    if (!problems.empty()) {
        std::string msg = "invalid split spec:";
        for (const auto& p : problems) msg += " " + p + ";";
        fail(ErrorKind::Config, msg);
    }
}

SliceBounds holdout_bounds(Eigen::Index panel_length, const SplitSpec& spec) {
    spec.validate();
    if (spec.train_length + spec.horizon > panel_length)
        fail(ErrorKind::Split, "holdout needs " + std::to_string(spec.train_length + spec.horizon) +
                                   " weeks but the panel has " + std::to_string(panel_length));
    return {0, spec.train_length, spec.train_length, spec.train_length + spec.horizon};
}

std::vector<SliceBounds> rolling_bounds(Eigen::Index panel_length, const SplitSpec& spec) {
    spec.validate();
    std::vector<SliceBounds> out;
    for (Eigen::Index start = 0; start + spec.window + spec.horizon <= panel_length; start += spec.step)
        out.push_back({start, start + spec.window, start + spec.window, start + spec.window + spec.horizon});
    return out;
}

std::pair<PanelDataset, PanelDataset> holdout_split(const PanelDataset& panel, const SplitSpec& spec) {
    const auto b = holdout_bounds(panel.length(), spec);
    return {panel.slice(b.train_begin, b.train_end), panel.slice(b.test_begin, b.test_end)};
}

std::vector<std::pair<PanelDataset, PanelDataset>> rolling_slices(const PanelDataset& panel, const SplitSpec& spec) {
    std::vector<std::pair<PanelDataset, PanelDataset>> out;
    for (const auto& b : rolling_bounds(panel.length(), spec))
        out.emplace_back(panel.slice(b.train_begin, b.train_end), panel.slice(b.test_begin, b.test_end));
    return out;
}

std::vector<ComparisonRow> compare_models(const std::vector<std::pair<std::string, MetricReport>>& reports) {
    require(reports.size() >= 2, ErrorKind::InvalidInput, "comparison needs at least two reports");
    std::vector<ComparisonRow> rows;
    for (const auto& [name, rep] : reports) rows.push_back({name, rep});
    auto flag = [&](auto get, bool higher_better, auto set) {
        double best = get(rows.front().report);
        for (const auto& r : rows) best = higher_better ? std::max(best, get(r.report)) : std::min(best, get(r.report));
        for (auto& r : rows) set(r, get(r.report) == best);
    };
    flag([](const MetricReport& m) { return m.mape; }, false, [](ComparisonRow& r, bool b) { r.best_mape = b; });
    flag([](const MetricReport& m) { return m.rmse; }, false, [](ComparisonRow& r, bool b) { r.best_rmse = b; });
    flag([](const MetricReport& m) { return m.rsr; }, false, [](ComparisonRow& r, bool b) { r.best_rsr = b; });
    flag([](const MetricReport& m) { return m.r2; }, true, [](ComparisonRow& r, bool b) { r.best_r2 = b; });
    flag([](const MetricReport& m) { return m.mase; }, false, [](ComparisonRow& r, bool b) { r.best_mase = b; });
    return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& table) {
    std::string out = "model,mape,rmse,rsr,r2,mase,best_mape,best_rmse,best_rsr,best_r2,best_mase\n";
    auto b = [](bool v) { return v ? std::string(",1") : std::string(",0"); };
    for (const auto& r : table) {
        out += r.model;
        for (double v : {r.report.mape, r.report.rmse, r.report.rsr, r.report.r2, r.report.mase})
            out += "," + csv::format_number(v);
        out += b(r.best_mape) + b(r.best_rmse) + b(r.best_rsr) + b(r.best_r2) + b(r.best_mase) + "\n";
    }
    return out;
}

std::string comparison_json(const std::vector<ComparisonRow>& table) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : table) {
        nlohmann::ordered_json best = nlohmann::ordered_json::array();
        if (r.best_mape) best.push_back("mape");
        if (r.best_rmse) best.push_back("rmse");
        if (r.best_rsr) best.push_back("rsr");
        if (r.best_r2) best.push_back("r2");
        if (r.best_mase) best.push_back("mase");
        arr.push_back({{"model", r.model},
                       {"mape", r.report.mape},
                       {"rmse", r.report.rmse},
                       {"rsr", r.report.rsr},
                       {"r2", r.report.r2},
                       {"mase", r.report.mase},
                       {"seasonal_lag", r.report.seasonal_lag},
                       {"train_mean", r.report.train_mean},
                       {"best", best}});
    }
    return arr.dump(2) + "\n";
}

}  // namespace climdem
