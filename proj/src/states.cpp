#include "cohassist/states.hpp"

#include <algorithm>
#include <sstream>

namespace cohassist {

std::size_t DensityMatrix::rank() const noexcept {
    std::size_t r = 0;
    for (double l : spectrum_.eigenvalues)
        if (l > tol_) ++r;
    return r;
}

DensityMatrix validate_density(const ComplexMatrix& raw, double tol) {
    if (!raw.is_square() || raw.rows() == 0) {
        throw Error(ErrorKind::ShapeMismatch, "density matrix must be square and nonempty");
    }
    const double herm = hermiticity_defect(raw);
    if (herm > tol) {
        std::ostringstream os;
        os << "max |rho_ij - conj(rho_ji)| = " << herm;
        throw Error(ErrorKind::NotHermitian, os.str());
    }
    const std::size_t n = raw.rows();
    ComplexMatrix m = raw;
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = m(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
            m(i, j) = avg;
            m(j, i) = std::conj(avg);
        }
    }
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > tol) {
        std::ostringstream os;
        os << "trace = " << tr;
        throw Error(ErrorKind::TraceNotOne, os.str());
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (m(i, i).real() > tol) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && std::abs(m(i, j)) > tol) {
                std::ostringstream os;
                os << "rho_" << i << i << " = " << m(i, i).real() << " but |rho_" << i << j << "| = " << std::abs(m(i, j));
                throw Error(ErrorKind::ZeroDiagonalInconsistency, os.str());
            }
        }
    }
    SpectralDecomposition spec = eig_hermitian(m, EigOptions{.tol = tol});
    if (spec.eigenvalues.back() < -tol) {
        std::ostringstream os;
        os << "smallest eigenvalue = " << spec.eigenvalues.back();
        throw Error(ErrorKind::NotPositive, os.str());
    }
    return DensityMatrix(std::move(m), std::move(spec), tol);
}

// ---------------------------------------------------------------------------

PureState PureState::from_amplitudes(ComplexVector amps, double tol) {
    if (amps.empty()) throw Error(ErrorKind::ShapeMismatch, "pure state needs at least one amplitude");
    for (const cplx& z : amps)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw Error(ErrorKind::NotFinite, "amplitude");
    const double nrm = norm2(amps);
    if (std::abs(nrm - 1.0) > tol) {
        std::ostringstream os;
        os << "state norm = " << nrm;
        throw Error(ErrorKind::NotNormalized, os.str());
    }
    return PureState(std::move(amps));
}

PureState PureState::normalized(ComplexVector amps) {
    const double nrm = norm2(amps);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw Error(ErrorKind::NotNormalized, "cannot normalize a zero vector");
    for (cplx& z : amps) z /= nrm;
    return PureState(std::move(amps));
}

PureState PureState::basis(std::size_t dim, std::size_t index) {
    if (index >= dim) throw Error(ErrorKind::ShapeMismatch, "basis index out of range");
    ComplexVector v(dim);
    v[index] = 1.0;
    return PureState(std::move(v));
}

DiagonalState PureState::diagonal() const {
    DiagonalState d;
    d.probs.reserve(amps_.size());
    for (const cplx& z : amps_) d.probs.push_back(std::norm(z));
    return d;
}

bool same_ray(const PureState& a, const PureState& b, double tol) {
    if (a.dim() != b.dim()) return false;
    return std::abs(std::abs(inner(a.amplitudes(), b.amplitudes())) - 1.0) <= tol;
}

PureEnsemble PureEnsemble::make(std::vector<EnsembleMember> members, double tol) {
    if (members.empty()) throw Error(ErrorKind::InvalidEnsemble, "ensemble has no members");
    const std::size_t dim = members.front().state.dim();
    double total = 0.0;
    for (const auto& m : members) {
        if (m.state.dim() != dim) throw Error(ErrorKind::ShapeMismatch, "ensemble members differ in dimension");
        if (!std::isfinite(m.weight) || m.weight < -tol) {
            throw Error(ErrorKind::InvalidEnsemble, "ensemble weight is negative or not finite");
        }
        total += m.weight;
    }
    if (std::abs(total - 1.0) > tol) {
        std::ostringstream os;
        os << "weights sum to " << total;
        throw Error(ErrorKind::InvalidEnsemble, os.str());
    }
    std::erase_if(members, [tol](const EnsembleMember& m) { return m.weight <= tol; });
    if (members.empty()) throw Error(ErrorKind::InvalidEnsemble, "every weight is below tolerance");
    double kept = 0.0;
    for (const auto& m : members) kept += m.weight;
    for (auto& m : members) m.weight /= kept;
    return PureEnsemble(std::move(members));
}

// ---------------------------------------------------------------------------

BipartitePureState BipartitePureState::make(std::size_t dim_a, std::size_t dim_b, ComplexVector amps, double tol) {
    if (dim_a == 0 || dim_b == 0 || amps.size() != dim_a * dim_b) {
        throw Error(ErrorKind::ShapeMismatch, "bipartite amplitude count must equal dim_a * dim_b");
    }
    const double nrm = norm2(amps);
    if (std::abs(nrm - 1.0) > tol) {
        std::ostringstream os;
        os << "bipartite state norm = " << nrm;
        throw Error(ErrorKind::NotNormalized, os.str());
    }
    return BipartitePureState(dim_a, dim_b, std::move(amps));
}

ComplexMatrix BipartitePureState::reduced_b() const {
    ComplexMatrix m(dim_b_, dim_b_);
    for (std::size_t a = 0; a < dim_a_; ++a)
        for (std::size_t i = 0; i < dim_b_; ++i)
            for (std::size_t j = 0; j < dim_b_; ++j) m(i, j) += amp(a, i) * std::conj(amp(a, j));
    return m;
}

ComplexMatrix BipartitePureState::reduced_a() const {
    ComplexMatrix m(dim_a_, dim_a_);
    for (std::size_t i = 0; i < dim_a_; ++i)
        for (std::size_t j = 0; j < dim_a_; ++j)
            for (std::size_t b = 0; b < dim_b_; ++b) m(i, j) += amp(i, b) * std::conj(amp(j, b));
    return m;
}

RealVector BipartitePureState::schmidt_coefficients() const {
    const ComplexMatrix small = dim_a_ <= dim_b_ ? reduced_a() : reduced_b();
    const auto spec = eig_hermitian(small);
    RealVector out;
    for (double l : spec.eigenvalues) out.push_back(std::sqrt(std::max(l, 0.0)));
    return out;
}

// ---------------------------------------------------------------------------

DiagonalState dephase(const DensityMatrix& rho) {
    DiagonalState d;
    d.probs.reserve(rho.dim());
    for (std::size_t i = 0; i < rho.dim(); ++i) d.probs.push_back(std::clamp(rho(i, i).real(), 0.0, 1.0));
    return d;
}

double entropy(std::span<const double> p, double log_base) {
    if (!(log_base > 0.0) || log_base == 1.0) throw Error(ErrorKind::ConfigInvalid, "log base must be positive and != 1");
    const double inv_log = 1.0 / std::log(log_base);
    double s = 0.0;
    for (double x : p) {
        if (x > 0.0) s -= x * std::log(x);
    }
    return s * inv_log;
}

double von_neumann_entropy(const DensityMatrix& rho, double log_base) {
    return entropy(rho.spectrum().eigenvalues, log_base);
}

DensityMatrix mix(const PureEnsemble& ens, double tol) {
    const std::size_t n = ens.dim();
    ComplexMatrix m(n, n);
    for (const auto& member : ens.members()) {
        const auto& v = member.state.amplitudes();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) += member.weight * v[i] * std::conj(v[j]);
    }
    return validate_density(m, tol);
}

BipartitePureState purify(const DensityMatrix& rho) {
    const std::size_t n = rho.dim();
    const auto& spec = rho.spectrum();
    ComplexVector amps(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = std::sqrt(std::max(spec.eigenvalues[i], 0.0));
        for (std::size_t b = 0; b < n; ++b) amps[i * n + b] = s * spec.eigenvectors[i][b];
    }
    // Clamping negative round-off eigenvalues perturbs the norm at the 1e-16 level only.
    const double nrm = norm2(amps);
    for (cplx& z : amps) z /= nrm;
    return BipartitePureState::make(n, n, std::move(amps), rho.tol());
}

PureEnsemble ensemble_from_purification(const BipartitePureState& psi, std::span<const ComplexVector> alice_basis,
                                        double tol) {
    const std::size_t da = psi.dim_a();
    const std::size_t db = psi.dim_b();
    if (alice_basis.size() != da) {
        throw Error(ErrorKind::BasisNotOrthonormal, "measurement basis must have dim_a vectors");
    }
    for (std::size_t j = 0; j < da; ++j) {
        if (alice_basis[j].size() != da) throw Error(ErrorKind::BasisNotOrthonormal, "basis vector has wrong length");
        for (std::size_t k = j; k < da; ++k) {
            const cplx g = inner(alice_basis[j], alice_basis[k]);
            const cplx expect = j == k ? cplx(1.0) : cplx(0.0);
            if (std::abs(g - expect) > tol) {
                std::ostringstream os;
                os << "Gram entry (" << j << "," << k << ") = " << g;
                throw Error(ErrorKind::BasisNotOrthonormal, os.str());
            }
        }
    }
    std::vector<EnsembleMember> members;
    for (const auto& a : alice_basis) {
        ComplexVector bob(db);
        for (std::size_t x = 0; x < da; ++x) {
            const cplx ca = std::conj(a[x]);
            if (ca == cplx{}) continue;
            for (std::size_t b = 0; b < db; ++b) bob[b] += ca * psi.amp(x, b);
        }
        double p = 0.0;
        for (const cplx& z : bob) p += std::norm(z);
        if (p <= tol) continue;
        members.push_back({p, PureState::normalized(std::move(bob))});
    }
    double total = 0.0;
    for (const auto& m : members) total += m.weight;
    for (auto& m : members) m.weight /= total;
    return PureEnsemble::make(std::move(members), tol);
}

PureEnsemble hjw_rotate(const DensityMatrix& rho, const ComplexMatrix& isometry, double tol) {
    const std::size_t n = rho.dim();
    const std::size_t r = isometry.cols();
    const std::size_t t = isometry.rows();
    if (r < rho.rank() || r > n) {
        std::ostringstream os;
        os << "isometry has " << r << " columns; need between rank " << rho.rank() << " and dim " << n;
        throw Error(ErrorKind::ShapeMismatch, os.str());
    }
    if (t < r) throw Error(ErrorKind::NotIsometry, "isometry needs at least as many rows as columns");
    const ComplexMatrix gram = isometry.adjoint() * isometry;
    const double defect = frobenius_distance(gram, ComplexMatrix::identity(r));
    if (defect > tol) {
        std::ostringstream os;
        os << "‖U†U - 1‖_F = " << defect;
        throw Error(ErrorKind::NotIsometry, os.str());
    }
    const auto& spec = rho.spectrum();
    std::vector<EnsembleMember> members;
    members.reserve(t);
    for (std::size_t j = 0; j < t; ++j) {
        ComplexVector v(n);
        for (std::size_t i = 0; i < r; ++i) {
            const cplx coeff = isometry(j, i) * std::sqrt(std::max(spec.eigenvalues[i], 0.0));
            if (coeff == cplx{}) continue;
            for (std::size_t b = 0; b < n; ++b) v[b] += coeff * spec.eigenvectors[i][b];
        }
        double p = 0.0;
        for (const cplx& z : v) p += std::norm(z);
        if (p <= tol) continue;
        members.push_back({p, PureState::normalized(std::move(v))});
    }
    double total = 0.0;
    for (const auto& m : members) total += m.weight;
    for (auto& m : members) m.weight /= total;
    return PureEnsemble::make(std::move(members), tol);
}

}  // namespace cohassist
