#pragma once

// Deciding C_a(ρ) = S(Δ(ρ)) by exhibiting a decomposition whose members all share the diagonal of ρ.
//
// Conventions: off-diagonal pairs (i, j), i < j, are enumerated row by row:
// (0,1), (0,2), ..., (0,n-1), (1,2), ..., (n-2,n-1). A phase column θ_ij describes the rank-one
// member with entries √(ρ_ii ρ_jj) e^{iθ_ij}; it is consistent (rank one) iff
// θ_ij = θ_i,i+1 + θ_i+1,i+2 + ... + θ_j-1,j (mod 2π).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cohassist/coherence.hpp"
#include "cohassist/states.hpp"

namespace cohassist {

std::size_t pair_count(std::size_t n) noexcept;
std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n);

/// B vector: ρ_ij / √(ρ_ii ρ_jj) per pair (0 when either diagonal is <= tol), then a final 1.
struct CoherenceVector {
    std::size_t dim = 0;
    ComplexVector entries;

    cplx pair(std::size_t i, std::size_t j) const { return entries[pair_index(i, j, dim)]; }
};

CoherenceVector coherence_vector(const DensityMatrix& rho);

/// Table of angles θ^(k)_ij in [0, 2π), one column per ensemble member.
class PhaseAssignment {
public:
    /// From the n-1 adjacent angles θ_01, θ_12, ... of each column; the rest follow by telescoping.
    static PhaseAssignment from_adjacent(std::size_t n, const std::vector<RealVector>& adjacent);
    /// From full per-column tables in pair order; chain constraints are checked by validate().
    static PhaseAssignment from_table(std::size_t n, std::vector<RealVector> columns);

    std::size_t dim() const noexcept { return n_; }
    std::size_t columns() const noexcept { return theta_.size(); }
    double theta(std::size_t k, std::size_t i, std::size_t j) const { return theta_[k][pair_index(i, j, n_)]; }
    const RealVector& column(std::size_t k) const { return theta_[k]; }

    /// Throws ConstraintViolation naming the first violated identity θ_is - θ_i+1,s = θ_i,i+1.
    void validate(double tol = kDefaultTol) const;

private:
    PhaseAssignment(std::size_t n, std::vector<RealVector> theta) : n_(n), theta_(std::move(theta)) {}
    std::size_t n_;
    std::vector<RealVector> theta_;
};

/// (pairs + 1) × T matrix A with A_(ij),k = e^{iθ^(k)_ij} and a final row of ones.
ComplexMatrix build_phase_matrix(const PhaseAssignment& pa, double tol = kDefaultTol);

struct ProbabilitySolution {
    bool feasible = false;
    RealVector p;            // best nonnegative solution found
    double residual = 0.0;   // ‖A p - B‖₂ over the real embedding
};

/// Nonnegative solution of A P = B (real and imaginary rows stacked); feasible iff residual <= tol.
ProbabilitySolution solve_probabilities(const PhaseAssignment& pa, const CoherenceVector& b, double tol = kDefaultTol);

/// Member with amplitudes √ρ_ii e^{iφ_i}, where θ_ij = φ_i - φ_j and φ_0 = 0.
PureState rank_one_member(const DiagonalState& diag, std::span<const double> theta_column);

enum class Verdict { Saturated, NotFound, Infeasible };
enum class Method { Qubit, QutritReal, NDimSignPattern, PhaseSearch, UserSupplied };

std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(Method m) noexcept;

struct SaturationCertificate {
    Verdict verdict = Verdict::NotFound;
    Method method = Method::UserSupplied;
    std::optional<PureEnsemble> witness;
    double residual_mix = 0.0;    // ‖mix(witness) - ρ‖_F
    double residual_diag = 0.0;   // max_k max_i |Δ(ψ_k)_i - Δ(ρ)_i|
    double coherence_gap = 0.0;   // max_k |C_r(ψ_k) - S(Δ(ρ))|
    std::size_t ensemble_size = 0;
    std::optional<PhaseAssignment> phases;
    std::optional<double> lower_bound;  // optimizer value attached when no witness was found
    std::vector<std::string> notes;
};

/// Saturated iff mix(ens) = ρ and every member diagonal equals Δ(ρ), both within tol.
SaturationCertificate check_theorem1(const PureEnsemble& ens, const DensityMatrix& rho, double tol = kDefaultTol,
                                     Method method = Method::UserSupplied);

/// Closed-form two-member decomposition for qubits.
PureEnsemble qubit_decomposition(const DensityMatrix& rho);

struct PolytopeCoords {
    double r1 = 0.0;  // ρ_01 / √(ρ_00 ρ_11)
    double r2 = 0.0;  // ρ_12 / √(ρ_11 ρ_22)
    double r3 = 0.0;  // ρ_02 / √(ρ_00 ρ_22)
};

struct PolytopeResult {
    PolytopeCoords coords;
    bool inside = false;
    std::array<double, 4> sums{};  // r1+r2+r3+1, r2-r1-r3+1, r3-r1-r2+1, r1-r2-r3+1
    bool gauge_applied = false;
};

/// Tetrahedron membership of a qutrit with real (or diagonally gauge-able) off-diagonals.
PolytopeResult qutrit_polytope(const DensityMatrix& rho);

/// The four weights ¼(r1+r2+r3+1), ¼(r2-r1-r3+1), ¼(r3-r1-r2+1), ¼(r1-r2-r3+1).
std::array<double, 4> qutrit_weights(const PolytopeCoords& r);

/// All four tetrahedron inequalities hold within tol.
bool inside_polytope(const PolytopeCoords& r, double tol = kDefaultTol);

/// Four-member sign-pattern decomposition (+,+,+), (-,+,+), (+,-,+), (+,+,-) for polytope states.
PureEnsemble qutrit_decomposition(const DensityMatrix& rho);

struct NDimResult {
    bool feasible = false;
    RealVector p;           // p_0 ... p_{n-1}
    double residual = 0.0;
    std::optional<PureEnsemble> ensemble;
    bool gauge_applied = false;
    std::string reason;
};

/// Sign-pattern family: member k has minus signs on components 0..k-1.
NDimResult ndim_decomposition(const DensityMatrix& rho);

struct PhaseSearchOptions {
    std::size_t ensemble_size = 0;  // 0 -> dim
    int budget = 200;               // refinement iterations
    std::uint64_t seed = 0;
    double tol = kDefaultTol;
};

/// Searches phase columns and probabilities solving A P = B. NotFound is a search outcome, not a proof.
SaturationCertificate search_phase_feasibility(const DensityMatrix& rho, const PhaseSearchOptions& opts = {});

struct PipelineConfig {
    double tol = kDefaultTol;
    int budget = 200;
    std::size_t max_ensemble_size = 0;  // 0 -> n²
    std::uint64_t seed = 0;
    bool attach_lower_bound = true;
    OptimizerConfig optimizer{};
};

/// Qubit formula, then qutrit polytope, then n-dim sign pattern, then phase search with T = n, 2n, n².
SaturationCertificate saturation_pipeline(const DensityMatrix& rho, const PipelineConfig& cfg = {});

}  // namespace cohassist
