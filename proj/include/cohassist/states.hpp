#pragma once

// Density matrices, dephased states, pure-state ensembles and purifications.
// Basis states are indexed from 0.

#include <cstddef>
#include <span>
#include <vector>

#include "cohassist/qmat.hpp"

namespace cohassist {

/// Hermitian, positive-semidefinite, unit-trace matrix. Only obtainable through validate_density.
class DensityMatrix {
public:
    std::size_t dim() const noexcept { return data_.rows(); }
    const ComplexMatrix& matrix() const noexcept { return data_; }
    cplx operator()(std::size_t i, std::size_t j) const { return data_(i, j); }
    double tol() const noexcept { return tol_; }

    /// Spectrum computed at validation time (descending eigenvalues).
    const SpectralDecomposition& spectrum() const noexcept { return spectrum_; }
    /// Number of eigenvalues above tol.
    std::size_t rank() const noexcept;

private:
    friend DensityMatrix validate_density(const ComplexMatrix& raw, double tol);
    DensityMatrix(ComplexMatrix data, SpectralDecomposition spectrum, double tol)
        : data_(std::move(data)), spectrum_(std::move(spectrum)), tol_(tol) {}

    ComplexMatrix data_;
    SpectralDecomposition spectrum_;
    double tol_;
};

/// Check every density-matrix invariant; throws Error naming the first violated one.
/// Order of checks: shape, Hermiticity, trace, zero-diagonal consistency, positivity.
DensityMatrix validate_density(const ComplexMatrix& raw, double tol = kDefaultTol);

/// Diagonal of a density matrix, i.e. Δ(ρ), kept as a probability vector.
struct DiagonalState {
    RealVector probs;
};

class PureState {
public:
    /// Rejects vectors whose norm differs from 1 by more than tol.
    static PureState from_amplitudes(ComplexVector amps, double tol = kDefaultTol);
    /// Rescales a nonzero vector to unit norm.
    static PureState normalized(ComplexVector amps);
    static PureState basis(std::size_t dim, std::size_t index);

    std::size_t dim() const noexcept { return amps_.size(); }
    const ComplexVector& amplitudes() const noexcept { return amps_; }
    cplx operator[](std::size_t i) const { return amps_[i]; }

    ComplexMatrix projector() const { return outer(amps_); }
    DiagonalState diagonal() const;

private:
    explicit PureState(ComplexVector amps) : amps_(std::move(amps)) {}
    ComplexVector amps_;
};

/// |⟨a|b⟩| = 1 within tol, i.e. equal up to global phase.
bool same_ray(const PureState& a, const PureState& b, double tol = kDefaultTol);

struct EnsembleMember {
    double weight;
    PureState state;
};

/// Weighted pure states {p_k, |ψ_k⟩}; weights sum to one.
class PureEnsemble {
public:
    /// Validates weights and dimensions. Members with weight <= tol are dropped and the rest renormalized.
    static PureEnsemble make(std::vector<EnsembleMember> members, double tol = kDefaultTol);

    std::size_t size() const noexcept { return members_.size(); }
    std::size_t dim() const noexcept { return members_.empty() ? 0 : members_.front().state.dim(); }
    const std::vector<EnsembleMember>& members() const noexcept { return members_; }
    const EnsembleMember& operator[](std::size_t k) const { return members_[k]; }

private:
    explicit PureEnsemble(std::vector<EnsembleMember> m) : members_(std::move(m)) {}
    std::vector<EnsembleMember> members_;
};

/// |ψ⟩_AB stored with the A index major: amps[a * dim_b + b].
class BipartitePureState {
public:
    static BipartitePureState make(std::size_t dim_a, std::size_t dim_b, ComplexVector amps, double tol = kDefaultTol);

    std::size_t dim_a() const noexcept { return dim_a_; }
    std::size_t dim_b() const noexcept { return dim_b_; }
    const ComplexVector& amplitudes() const noexcept { return amps_; }
    cplx amp(std::size_t a, std::size_t b) const { return amps_[a * dim_b_ + b]; }

    /// Tr_A |ψ⟩⟨ψ|
    ComplexMatrix reduced_b() const;
    /// Tr_B |ψ⟩⟨ψ|
    ComplexMatrix reduced_a() const;
    /// Descending Schmidt coefficients (square roots of the reduced spectrum).
    RealVector schmidt_coefficients() const;

private:
    BipartitePureState(std::size_t da, std::size_t db, ComplexVector amps)
        : dim_a_(da), dim_b_(db), amps_(std::move(amps)) {}
    std::size_t dim_a_;
    std::size_t dim_b_;
    ComplexVector amps_;
};

DiagonalState dephase(const DensityMatrix& rho);

/// Shannon entropy -Σ p log p in the given base, with 0 log 0 = 0. Tiny negative entries count as 0.
double entropy(std::span<const double> p, double log_base = 2.0);
inline double entropy(const DiagonalState& d, double log_base = 2.0) { return entropy(d.probs, log_base); }
/// S(ρ) from the cached spectrum.
double von_neumann_entropy(const DensityMatrix& rho, double log_base = 2.0);

/// Σ p_k |ψ_k⟩⟨ψ_k| as a validated density matrix.
DensityMatrix mix(const PureEnsemble& ens, double tol = kDefaultTol);

/// Σ_i √λ_i |i⟩_A |e_i⟩_B from the spectral decomposition; dim_a = dim(ρ).
BipartitePureState purify(const DensityMatrix& rho);

/// Steered ensemble when A is measured in alice_basis (one vector per outcome, dim_a vectors).
PureEnsemble ensemble_from_purification(const BipartitePureState& psi, std::span<const ComplexVector> alice_basis,
                                        double tol = kDefaultTol);

/// Schrödinger-HJW ensemble: √p_j |φ_j⟩ = Σ_i U_ji √λ_i |e_i⟩ for an isometry U (T×r, U†U = 1).
/// r may range from rank(ρ) to dim(ρ); eigenvectors are taken in descending-eigenvalue order.
PureEnsemble hjw_rotate(const DensityMatrix& rho, const ComplexMatrix& isometry, double tol = kDefaultTol);

}  // namespace cohassist
