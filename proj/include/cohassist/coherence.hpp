#pragma once

// Coherence measures in a fixed reference basis and a numerical lower bound
// on the coherence of assistance.

#include <cstdint>
#include <optional>

#include "cohassist/states.hpp"

namespace cohassist {

/// C_r(ρ) = S(Δ(ρ)) - S(ρ), clamped at zero for round-off.
double relative_entropy_coherence(const DensityMatrix& rho, double log_base = 2.0);

/// C_r of a pure state: the entropy of its squared amplitudes.
double pure_state_coherence(const PureState& psi, double log_base = 2.0);

/// Σ_{i≠j} |ρ_ij|
double l1_coherence(const DensityMatrix& rho);

/// Regularized coherence of assistance, S(Δ(ρ)).
double regularized_assistance(const DensityMatrix& rho, double log_base = 2.0);

/// Σ_k p_k C_r(|ψ_k⟩)
double ensemble_average_coherence(const PureEnsemble& ens, double log_base = 2.0);

struct OptimizerConfig {
    std::size_t ensemble_size = 0;  // 0 -> default_ensemble_size(rho)
    int restarts = 20;
    int max_iters = 200;  // sweeps per restart
    std::uint64_t seed = 0;
    double convergence_tol = 1e-12;
    double log_base = 2.0;
    double tol = kDefaultTol;
};

/// n * rank(ρ), capped at n².
std::size_t default_ensemble_size(const DensityMatrix& rho);

struct AssistanceResult {
    double value = 0.0;    // certified lower bound on C_a: average coherence of `witness`
    PureEnsemble witness;  // decomposition of rho achieving `value`
    double ceiling = 0.0;  // S(Δ(ρ))
    double gap = 0.0;      // ceiling - value
    std::size_t ensemble_size = 0;
    int best_restart = 0;
};

/// Random-restart coordinate ascent over isometries U (ensembles via hjw_rotate),
/// moving by Givens rotations with real and imaginary mixing on each pair of ensemble rows.
/// Deterministic for a fixed seed; restart k uses derive_seed(seed, k).
AssistanceResult maximize_assistance(const DensityMatrix& rho, const OptimizerConfig& cfg = {});

struct CoherenceReport {
    double c_r = 0.0;
    double c_l1 = 0.0;
    double c_a_infinity = 0.0;
    std::optional<double> c_a_lower_bound;
    std::optional<PureEnsemble> witness;
    double log_base = 2.0;
};

CoherenceReport coherence_report(const DensityMatrix& rho, double log_base = 2.0,
                                 const std::optional<OptimizerConfig>& optimizer = std::nullopt);

}  // namespace cohassist
