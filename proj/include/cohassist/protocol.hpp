#pragma once

// One-way assisted coherence distillation: Alice holds the ancilla of a purification keyed to a
// decomposition of Bob's state, measures it in the computational basis and announces the outcome.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "cohassist/saturation.hpp"

namespace cohassist {

/// Σ_k √p_k |k⟩_A ⊗ |ψ_k⟩_B
BipartitePureState build_joint_state(const PureEnsemble& ens);

struct AutoSaturate {
    PipelineConfig pipeline{};
};
struct UserEnsemble {
    PureEnsemble ensemble;
};
using Strategy = std::variant<AutoSaturate, UserEnsemble>;

struct Enumerate {};
struct Sample {
    std::uint64_t seed = 0;
    std::size_t shots = 10000;
};
using Mode = std::variant<Enumerate, Sample>;

struct Outcome {
    std::size_t index;  // Alice's basis vector |index⟩_A
    double probability;
    PureState state;    // Bob's collapsed state
    double coherence;
};

struct SampleStats {
    std::vector<std::size_t> counts;     // per outcome, same order as ProtocolTranscript::outcomes
    std::vector<double> frequencies;
    double empirical_average = 0.0;
    double standard_error = 0.0;         // sample standard deviation / √shots
};

struct ProtocolTranscript {
    DensityMatrix input_state;
    PureEnsemble decomposition;
    BipartitePureState joint_state;
    std::vector<ComplexVector> alice_basis;
    std::vector<Outcome> outcomes;
    double average_coherence = 0.0;
    double ceiling = 0.0;  // S(Δ(ρ_B))
    Mode mode;
    std::optional<SampleStats> sample_stats;
    std::optional<SaturationCertificate> certificate;  // AutoSaturate only
    bool fallback_used = false;  // AutoSaturate fell back to the optimizer witness
    std::vector<std::string> warnings;
};

struct ProtocolOptions {
    double tol = kDefaultTol;
    double log_base = 2.0;
};

/// Throws NoDecompositionFound if AutoSaturate cannot produce any decomposition, and
/// InvalidEnsemble if a user ensemble does not decompose rho.
ProtocolTranscript run_protocol(const DensityMatrix& rho, const Strategy& strategy, const Mode& mode,
                                const ProtocolOptions& opts = {});

}  // namespace cohassist
