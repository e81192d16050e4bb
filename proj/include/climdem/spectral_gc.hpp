#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "climdem/random.hpp"
#include "climdem/var.hpp"

namespace climdem {

struct GcBootstrapConfig {
    int n_replicates = 1000;
    double alpha = 0.05;
    /// Mean stationary-bootstrap block length; <= 0 selects ceil(T^(1/3)).
    double expected_block_length = 0.0;
    int max_var_order = 4;
    std::uint64_t seed = 0;

    void validate() const;
    [[nodiscard]] double block_length_for(Eigen::Index t) const;
};

/// Fourier frequencies f_i = i / T (cycles per week), i = 1..floor(T/2).
[[nodiscard]] Eigen::VectorXd fourier_frequencies(Eigen::Index t);

struct SpectrumResult {
    Eigen::VectorXd frequencies;  ///< cycles per week
    Eigen::VectorXd estimate;
    Eigen::VectorXd threshold_alpha;
    Eigen::VectorXd threshold_bonferroni;
    std::vector<bool> sig_alpha;
    std::vector<bool> sig_bonferroni;
    int var_order = 0;
    /// Across-frequency medians of the bootstrap spectra (the null distribution).
    std::vector<double> bootstrap_medians;

    [[nodiscard]] std::size_t n_significant_bonferroni() const;
    [[nodiscard]] std::size_t n_significant_alpha() const;
    [[nodiscard]] std::string to_csv() const;
};

/// Geweke spectrum of `cause` -> `effect` implied by a fitted VAR, at angular frequencies `omega`.
/// The cause's innovation is orthogonalized against the effect's, so the measure is
/// identically zero when the cause's lags are absent from the effect equation.
[[nodiscard]] Eigen::VectorXd gc_spectrum_from_var(const VarModel& model, Eigen::Index cause, Eigen::Index effect,
                                                   const Eigen::VectorXd& omega);

/// Point estimate: VAR on (cause, effect) with BIC order, evaluated at the Fourier frequencies.
[[nodiscard]] Eigen::VectorXd unconditional_gc_estimate(const Eigen::VectorXd& cause, const Eigen::VectorXd& effect,
                                                        int max_order, int* order_out = nullptr);

/// Conditional spectrum cause -> effect | conditioning. The (effect, conditioning) VAR order is
/// chosen by BIC and reused for the (effect, cause, conditioning) system.
[[nodiscard]] Eigen::VectorXd conditional_gc_estimate(const Eigen::VectorXd& cause, const Eigen::VectorXd& effect,
                                                      const Eigen::VectorXd& conditioning, int max_order,
                                                      int* order_out = nullptr);

/// Length-preserving stationary bootstrap indices (geometric blocks, wrap-around).
[[nodiscard]] std::vector<Eigen::Index> stationary_bootstrap_indices(Eigen::Index t, double expected_block_length,
                                                                     Rng& rng);
[[nodiscard]] Eigen::VectorXd stationary_bootstrap(const Eigen::VectorXd& series, double expected_block_length, Rng& rng);

struct GcThresholds {
    double pointwise = 0.0;
    double bonferroni = 0.0;
    std::vector<double> medians;
};

/// Null distribution from independent stationary-bootstrap resamples of cause and effect.
[[nodiscard]] GcThresholds bootstrap_threshold_unconditional(const Eigen::VectorXd& cause,
                                                             const Eigen::VectorXd& effect,
                                                             const GcBootstrapConfig& cfg);

/// Null distribution for the conditional spectrum: residual bootstrap of the (effect, conditioning)
/// VAR, independent stationary bootstrap of the cause.
[[nodiscard]] GcThresholds bootstrap_threshold_conditional(const Eigen::VectorXd& cause, const Eigen::VectorXd& effect,
                                                           const Eigen::VectorXd& conditioning,
                                                           const GcBootstrapConfig& cfg);

[[nodiscard]] GcThresholds thresholds_from_medians(std::vector<double> medians, double alpha, Eigen::Index n_freq);

[[nodiscard]] SpectrumResult unconditional_gc_spectrum(const Eigen::VectorXd& cause, const Eigen::VectorXd& effect,
                                                       const GcBootstrapConfig& cfg);
[[nodiscard]] SpectrumResult conditional_gc_spectrum(const Eigen::VectorXd& cause, const Eigen::VectorXd& effect,
                                                     const Eigen::VectorXd& conditioning, const GcBootstrapConfig& cfg);

}  // namespace climdem
