#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace climdem {

/// Machine-readable error category, surfaced by the CLI in its error JSON.
enum class ErrorKind {
    InvalidInput,
    Shape,
    InsufficientData,
    Alignment,
    Ingestion,
    EmptyInput,
    Gap,
    Config,
    RankDeficiency,
    Numerical,
    Convergence,
    Lookup,
    Stability,
    MetricUndefined,
    Split,
    DegenerateInput,
    Diagnostics,
    Coverage,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) fail(kind, what);
}

}  // namespace climdem
