#include <array>
#include <vector>

#include "climdem/linalg.hpp"
#include "climdem/series.hpp"

namespace climdem {

namespace {

/// Solves (I + lambda D'D) c = rhs for symmetric pentadiagonal systems via a
/// banded LDL' factorization. D is the (n-2) x n second-difference operator.
template <typename Scalar>
Vector<Scalar> solve_hp_system(const Vector<Scalar>& rhs, Scalar lambda) {
    const Eigen::Index n = rhs.size();
    // band[i][k] = A(i, i + k), k = 0..2
    std::vector<std::array<Scalar, 3>> band(static_cast<std::size_t>(n), {Scalar(1), Scalar(0), Scalar(0)});
    constexpr std::array<Scalar, 3> d{Scalar(1), Scalar(-2), Scalar(1)};
    for (Eigen::Index r = 0; r + 2 < n; ++r) {
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) band[static_cast<std::size_t>(r + a)][static_cast<std::size_t>(b - a)] += lambda * d[a] * d[b];
    }
    // A = L D L', L unit lower with two sub-diagonals.
    std::vector<Scalar> diag(static_cast<std::size_t>(n)), l1(static_cast<std::size_t>(n), Scalar(0)),
        l2(static_cast<std::size_t>(n), Scalar(0));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (i >= 2) l2[u] = band[u - 2][2] / diag[u - 2];
        if (i >= 1) {
            Scalar a = band[u - 1][1];
            if (i >= 2) a -= l2[u] * diag[u - 2] * l1[u - 1];
            l1[u] = a / diag[u - 1];
        }
        Scalar di = band[u][0];
        if (i >= 1) di -= l1[u] * l1[u] * diag[u - 1];
        if (i >= 2) di -= l2[u] * l2[u] * diag[u - 2];
        diag[u] = di;
    }
    Vector<Scalar> x = rhs;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (i >= 1) x(i) -= l1[u] * x(i - 1);
        if (i >= 2) x(i) -= l2[u] * x(i - 2);
    }
    for (Eigen::Index i = 0; i < n; ++i) x(i) /= diag[static_cast<std::size_t>(i)];
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        if (i + 1 < n) x(i) -= l1[static_cast<std::size_t>(i + 1)] * x(i + 1);
        if (i + 2 < n) x(i) -= l2[static_cast<std::size_t>(i + 2)] * x(i + 2);
    }
    return x;
}

}  // namespace

Eigen::VectorXd hp_cycle(const Eigen::VectorXd& y, const HpConfig& cfg) {
    cfg.validate();
    require(y.size() >= 4, ErrorKind::InsufficientData, "HP filter needs at least 4 observations");
    require(y.allFinite(), ErrorKind::InvalidInput, "HP filter input must be finite");
    // The cycle c = y - trend solves (I + lambda D'D) c = lambda D'D y, which is
    // exactly zero for linear inputs.
    const Eigen::Index n = y.size();
    Eigen::VectorXd second(n - 2);
    for (Eigen::Index r = 0; r + 2 < n; ++r) second(r) = y(r) - 2.0 * y(r + 1) + y(r + 2);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (Eigen::Index r = 0; r + 2 < n; ++r) {
        rhs(r) += cfg.lambda * second(r);
        rhs(r + 1) -= 2.0 * cfg.lambda * second(r);
        rhs(r + 2) += cfg.lambda * second(r);
    }
    return solve_hp_system<double>(rhs, cfg.lambda);
}

WeeklySeries hp_cycle(const WeeklySeries& series, const HpConfig& cfg) {
    WeeklySeries out = series;
    out.name = series.name + "_hp_cycle";
    out.values = hp_cycle(series.values, cfg);
    return out;
}

}  // namespace climdem
