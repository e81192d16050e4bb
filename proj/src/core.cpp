#include <atomic>
#include <sstream>
#include <thread>

#include "climdem/error.hpp"
#include "climdem/linalg.hpp"
#include "climdem/parallel.hpp"

namespace climdem {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidInput: return "invalid_input";
        case ErrorKind::Shape: return "shape";
        case ErrorKind::InsufficientData: return "insufficient_data";
        case ErrorKind::Alignment: return "alignment";
        case ErrorKind::Ingestion: return "ingestion";
        case ErrorKind::EmptyInput: return "empty_input";
        case ErrorKind::Gap: return "gap";
        case ErrorKind::Config: return "config";
        case ErrorKind::RankDeficiency: return "rank_deficiency";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Convergence: return "convergence";
        case ErrorKind::Lookup: return "lookup";
        case ErrorKind::Stability: return "stability";
        case ErrorKind::MetricUndefined: return "metric_undefined";
        case ErrorKind::Split: return "split";
        case ErrorKind::DegenerateInput: return "degenerate_input";
        case ErrorKind::Diagnostics: return "diagnostics";
        case ErrorKind::Coverage: return "coverage";
    }
    return "unknown";
}

namespace {
std::atomic<std::size_t> g_threads{0};
}

void set_thread_count(std::size_t n) noexcept { g_threads.store(n); }

std::size_t thread_count() noexcept {
    const std::size_t n = g_threads.load();
    if (n != 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

LeastSquares least_squares(const MatrixXd& x, const MatrixXd& y, std::span<const std::string> column_names) {
    require(x.rows() == y.rows(), ErrorKind::Shape, "least squares: design and response row counts differ");
    require(x.rows() >= x.cols(), ErrorKind::InsufficientData, "least squares: fewer rows than regressors");
    Eigen::ColPivHouseholderQR<MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < x.cols()) {
        std::ostringstream msg;
        msg << "rank-deficient design (rank " << qr.rank() << " of " << x.cols() << "); collinear columns:";
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < x.cols(); ++j) {
            const auto col = static_cast<std::size_t>(perm(j));
            msg << ' ' << (col < column_names.size() ? column_names[col] : "col" + std::to_string(col));
        }
        fail(ErrorKind::RankDeficiency, msg.str());
    }
    LeastSquares out;
    out.coef = qr.solve(y);
    out.residuals = y - x * out.coef;
    const Eigen::Index k = x.cols();
    MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(k, k));
    MatrixXd inner = r_inv * r_inv.transpose();
    out.xtx_inv = qr.colsPermutation() * inner * qr.colsPermutation().transpose();
    return out;
}

Standardization column_standardization(const MatrixXd& x) {
    Standardization s;
    s.mean = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double sd = stddev(x.col(j));
        require(sd > 0.0, ErrorKind::DegenerateInput, "column " + std::to_string(j) + " has zero variance");
        s.scale(j) = sd;
    }
    return s;
}

}  // namespace climdem
