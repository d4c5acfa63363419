#include "cohassist/saturation.hpp"

#include <algorithm>
#include <numbers>
#include <queue>
#include <sstream>

#include "cohassist/random.hpp"

namespace cohassist {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

// Distance between two angles on the circle.
double angle_distance(double a, double b) {
    const double d = wrap_angle(a - b);
    return std::min(d, kTwoPi - d);
}

// Diagonal-unitary frame in which the off-diagonals are real: ρ = D ρ' D†, D = diag(phases).
struct RealFrame {
    ComplexVector phases;
    DensityMatrix real_rho;
    bool applied = false;
};

std::optional<RealFrame> real_frame(const DensityMatrix& rho) {
    const std::size_t n = rho.dim();
    const double tol = rho.tol();
    bool already_real = true;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(rho(i, j).imag()) > tol) already_real = false;

    ComplexVector phases(n, cplx(1.0));
    bool applied = false;
    if (!already_real) {
        // Spanning forest over nonzero entries; tree edges become nonnegative reals.
        std::vector<bool> seen(n, false);
        std::vector<double> phi(n, 0.0);
        for (std::size_t root = 0; root < n; ++root) {
            if (seen[root]) continue;
            seen[root] = true;
            std::queue<std::size_t> todo;
            todo.push(root);
            while (!todo.empty()) {
                const std::size_t u = todo.front();
                todo.pop();
                for (std::size_t v = 0; v < n; ++v) {
                    if (seen[v] || std::abs(rho(u, v)) <= tol) continue;
                    seen[v] = true;
                    phi[v] = phi[u] - std::arg(rho(u, v));
                    todo.push(v);
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i) phases[i] = std::polar(1.0, phi[i]);
        applied = true;
    }

    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const cplx v = std::conj(phases[i]) * rho(i, j) * phases[j];
            if (std::abs(v.imag()) > tol) return std::nullopt;
            m(i, j) = v.real();
        }
    try {
        return RealFrame{std::move(phases), validate_density(m, tol), applied};
    } catch (const Error&) {
        return std::nullopt;
    }
}

PureState to_original_frame(const PureState& psi, const ComplexVector& phases) {
    ComplexVector v = psi.amplitudes();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= phases[i];
    return PureState::normalized(std::move(v));
}

// Indices with ρ_ii > tol.
std::vector<std::size_t> support_of(const DensityMatrix& rho) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < rho.dim(); ++i)
        if (rho(i, i).real() > rho.tol()) s.push_back(i);
    return s;
}

DensityMatrix compress(const DensityMatrix& rho, const std::vector<std::size_t>& support) {
    const std::size_t k = support.size();
    ComplexMatrix m(k, k);
    double tr = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        tr += rho(support[a], support[a]).real();
        for (std::size_t b = 0; b < k; ++b) m(a, b) = rho(support[a], support[b]);
    }
    m *= cplx(1.0 / tr);
    return validate_density(m, rho.tol());
}

PureEnsemble embed(const PureEnsemble& ens, const std::vector<std::size_t>& support, std::size_t n, double tol) {
    std::vector<EnsembleMember> out;
    for (const auto& m : ens.members()) {
        ComplexVector v(n);
        for (std::size_t a = 0; a < support.size(); ++a) v[support[a]] = m.state[a];
        out.push_back({m.weight, PureState::normalized(std::move(v))});
    }
    return PureEnsemble::make(std::move(out), tol);
}

PureState signed_root_diagonal(const DiagonalState& d, const std::vector<int>& signs) {
    ComplexVector v(d.probs.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(signs[i]) * std::sqrt(d.probs[i]);
    return PureState::normalized(std::move(v));
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Saturated: return "Saturated";
        case Verdict::NotFound: return "NotFound";
        case Verdict::Infeasible: return "Infeasible";
    }
    return "Unknown";
}

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::Qubit: return "Qubit";
        case Method::QutritReal: return "QutritReal";
        case Method::NDimSignPattern: return "NDimSignPattern";
        case Method::PhaseSearch: return "PhaseSearch";
        case Method::UserSupplied: return "UserSupplied";
    }
    return "Unknown";
}

std::size_t pair_count(std::size_t n) noexcept { return n * (n - 1) / 2; }

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) {
    if (!(i < j && j < n)) throw Error(ErrorKind::ShapeMismatch, "pair index needs i < j < n");
    // Pairs before row i: Σ_{r<i} (n-1-r) = i(2n-i-1)/2.
    return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

CoherenceVector coherence_vector(const DensityMatrix& rho) {
    const std::size_t n = rho.dim();
    const double tol = rho.tol();
    CoherenceVector b;
    b.dim = n;
    b.entries.reserve(pair_count(n) + 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double di = rho(i, i).real();
            const double dj = rho(j, j).real();
            if (di <= tol || dj <= tol) {
                b.entries.push_back(0.0);
            } else {
                b.entries.push_back(rho(i, j) / std::sqrt(di * dj));
            }
        }
    b.entries.push_back(1.0);
    return b;
}

// ---------------------------------------------------------------------------

PhaseAssignment PhaseAssignment::from_adjacent(std::size_t n, const std::vector<RealVector>& adjacent) {
    if (n == 0) throw Error(ErrorKind::ShapeMismatch, "dimension must be positive");
    std::vector<RealVector> table;
    table.reserve(adjacent.size());
    for (const auto& adj : adjacent) {
        if (adj.size() != n - 1) throw Error(ErrorKind::ShapeMismatch, "need n-1 adjacent angles per column");
        RealVector col(pair_count(n));
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                acc += adj[j - 1];
                col[pair_index(i, j, n)] = wrap_angle(acc);
            }
        }
        table.push_back(std::move(col));
    }
    return PhaseAssignment(n, std::move(table));
}

PhaseAssignment PhaseAssignment::from_table(std::size_t n, std::vector<RealVector> columns) {
    if (n == 0) throw Error(ErrorKind::ShapeMismatch, "dimension must be positive");
    for (auto& col : columns) {
        if (col.size() != pair_count(n)) throw Error(ErrorKind::ShapeMismatch, "phase column has wrong length");
        for (double& a : col) {
            if (!std::isfinite(a)) throw Error(ErrorKind::NotFinite, "phase angle");
            a = wrap_angle(a);
        }
    }
    return PhaseAssignment(n, std::move(columns));
}

void PhaseAssignment::validate(double tol) const {
    for (std::size_t k = 0; k < theta_.size(); ++k) {
        for (std::size_t i = 0; i + 2 < n_; ++i) {
            const double link = theta(k, i, i + 1);
            for (std::size_t s = i + 2; s < n_; ++s) {
                const double lhs = theta(k, i, s) - theta(k, i + 1, s);
                if (angle_distance(lhs, link) > tol) {
                    std::ostringstream os;
                    os << "column " << k << ": theta_" << i << s << " - theta_" << i + 1 << s << " != theta_" << i
                       << i + 1 << " (off by " << angle_distance(lhs, link) << ")";
                    throw Error(ErrorKind::ConstraintViolation, os.str());
                }
            }
        }
    }
}

ComplexMatrix build_phase_matrix(const PhaseAssignment& pa, double tol) {
    pa.validate(tol);
    const std::size_t n = pa.dim();
    const std::size_t rows = pair_count(n) + 1;
    ComplexMatrix a(rows, pa.columns());
    for (std::size_t k = 0; k < pa.columns(); ++k) {
        const auto& col = pa.column(k);
        for (std::size_t r = 0; r + 1 < rows; ++r) a(r, k) = std::polar(1.0, col[r]);
        a(rows - 1, k) = 1.0;
    }
    return a;
}

ProbabilitySolution solve_probabilities(const PhaseAssignment& pa, const CoherenceVector& b, double tol) {
    if (b.dim != pa.dim() || b.entries.size() != pair_count(pa.dim()) + 1) {
        throw Error(ErrorKind::ShapeMismatch, "coherence vector does not match phase assignment");
    }
    const ComplexMatrix a = build_phase_matrix(pa, tol);
    const std::size_t pairs = pair_count(pa.dim());
    const std::size_t t = pa.columns();
    // Real embedding: Re and Im row for each pair, then the normalization row.
    RealMatrix ar(2 * pairs + 1, t);
    RealVector br(2 * pairs + 1);
    for (std::size_t r = 0; r < pairs; ++r) {
        for (std::size_t k = 0; k < t; ++k) {
            ar(2 * r, k) = a(r, k).real();
            ar(2 * r + 1, k) = a(r, k).imag();
        }
        br[2 * r] = b.entries[r].real();
        br[2 * r + 1] = b.entries[r].imag();
    }
    for (std::size_t k = 0; k < t; ++k) ar(2 * pairs, k) = 1.0;
    br[2 * pairs] = b.entries.back().real();

    const NnlsResult res = nnls_solve(ar, br, NnlsOptions{.tol = tol});
    return ProbabilitySolution{res.residual <= tol, res.x, res.residual};
}

PureState rank_one_member(const DiagonalState& diag, std::span<const double> theta_column) {
    const std::size_t n = diag.probs.size();
    if (theta_column.size() != pair_count(n)) throw Error(ErrorKind::ShapeMismatch, "phase column has wrong length");
    ComplexVector v(n);
    double phi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) phi -= theta_column[pair_index(i - 1, i, n)];
        v[i] = std::polar(std::sqrt(diag.probs[i]), phi);
    }
    return PureState::normalized(std::move(v));
}

// ---------------------------------------------------------------------------

SaturationCertificate check_theorem1(const PureEnsemble& ens, const DensityMatrix& rho, double tol, Method method) {
    const std::size_t n = rho.dim();
    if (ens.dim() != n) throw Error(ErrorKind::ShapeMismatch, "ensemble and state dimensions differ");
    ComplexMatrix mixed(n, n);
    for (const auto& m : ens.members()) mixed += m.weight * m.state.projector();

    const DiagonalState target = dephase(rho);
    const double ceiling = entropy(target);
    double diag_dev = 0.0;
    double coh_gap = 0.0;
    for (const auto& m : ens.members()) {
        const DiagonalState d = m.state.diagonal();
        for (std::size_t i = 0; i < n; ++i) diag_dev = std::max(diag_dev, std::abs(d.probs[i] - target.probs[i]));
        coh_gap = std::max(coh_gap, std::abs(pure_state_coherence(m.state) - ceiling));
    }

    SaturationCertificate cert;
    cert.method = method;
    cert.residual_mix = frobenius_distance(mixed, rho.matrix());
    cert.residual_diag = diag_dev;
    cert.coherence_gap = coh_gap;
    cert.ensemble_size = ens.size();
    cert.verdict = (cert.residual_mix <= tol && cert.residual_diag <= tol) ? Verdict::Saturated : Verdict::NotFound;
    if (cert.verdict == Verdict::Saturated) cert.witness = ens;
    return cert;
}

// ---------------------------------------------------------------------------

PureEnsemble qubit_decomposition(const DensityMatrix& rho) {
    if (rho.dim() != 2) throw Error(ErrorKind::ShapeMismatch, "qubit_decomposition needs a 2x2 state");
    const double tol = rho.tol();
    const double d0 = rho(0, 0).real();
    const double d1 = rho(1, 1).real();
    if (d0 <= tol) return PureEnsemble::make({{1.0, PureState::basis(2, 1)}}, tol);
    if (d1 <= tol) return PureEnsemble::make({{1.0, PureState::basis(2, 0)}}, tol);

    const double s0 = std::sqrt(d0);
    const double s1 = std::sqrt(d1);
    const cplx off = rho(0, 1);
    const double norm = std::sqrt(d0 * d1);
    std::vector<EnsembleMember> members;
    if (std::abs(off.imag()) <= tol) {
        const double r = std::clamp(off.real() / norm, -1.0, 1.0);
        members.push_back({0.5 * (1.0 + r), PureState::normalized({s0, s1})});
        members.push_back({0.5 * (1.0 - r), PureState::normalized({s0, -s1})});
    } else {
        const double r = std::min(std::abs(off) / norm, 1.0);
        const double arg = std::arg(off);
        members.push_back({0.5 * (1.0 + r), PureState::normalized({s0, std::polar(s1, -arg)})});
        members.push_back({0.5 * (1.0 - r), PureState::normalized({s0, std::polar(s1, -(std::numbers::pi + arg))})});
    }
    return PureEnsemble::make(std::move(members), tol);
}

std::array<double, 4> qutrit_weights(const PolytopeCoords& r) {
    return {0.25 * (r.r1 + r.r2 + r.r3 + 1.0), 0.25 * (r.r2 - r.r1 - r.r3 + 1.0), 0.25 * (r.r3 - r.r1 - r.r2 + 1.0),
            0.25 * (r.r1 - r.r2 - r.r3 + 1.0)};
}

bool inside_polytope(const PolytopeCoords& r, double tol) {
    for (double w : qutrit_weights(r))
        if (4.0 * w < -tol) return false;
    return true;
}

PolytopeResult qutrit_polytope(const DensityMatrix& rho) {
    if (rho.dim() != 3) throw Error(ErrorKind::ShapeMismatch, "qutrit_polytope needs a 3x3 state");
    auto frame = real_frame(rho);
    if (!frame) throw Error(ErrorKind::NotApplicable, "off-diagonal phases cannot be removed by a diagonal unitary");
    const CoherenceVector b = coherence_vector(frame->real_rho);
    PolytopeResult out;
    out.coords = PolytopeCoords{b.pair(0, 1).real(), b.pair(1, 2).real(), b.pair(0, 2).real()};
    const auto w = qutrit_weights(out.coords);
    for (std::size_t k = 0; k < 4; ++k) out.sums[k] = 4.0 * w[k];
    out.inside = inside_polytope(out.coords, rho.tol());
    out.gauge_applied = frame->applied;
    return out;
}

PureEnsemble qutrit_decomposition(const DensityMatrix& rho) {
    const PolytopeResult poly = qutrit_polytope(rho);
    if (!poly.inside) {
        std::ostringstream os;
        os << "r = (" << poly.coords.r1 << ", " << poly.coords.r2 << ", " << poly.coords.r3 << ")";
        throw Error(ErrorKind::OutsidePolytope, os.str());
    }
    const auto frame = real_frame(rho);
    const DiagonalState d = dephase(frame->real_rho);
    const auto w = qutrit_weights(poly.coords);
    static const std::array<std::vector<int>, 4> patterns = {
        std::vector<int>{1, 1, 1}, std::vector<int>{-1, 1, 1}, std::vector<int>{1, -1, 1}, std::vector<int>{1, 1, -1}};
    std::vector<EnsembleMember> members;
    for (std::size_t k = 0; k < 4; ++k) {
        members.push_back({std::max(w[k], 0.0), to_original_frame(signed_root_diagonal(d, patterns[k]), frame->phases)});
    }
    double total = 0.0;
    for (const auto& m : members) total += m.weight;
    for (auto& m : members) m.weight /= total;
    return PureEnsemble::make(std::move(members), rho.tol());
}

NDimResult ndim_decomposition(const DensityMatrix& rho) {
    const std::size_t n = rho.dim();
    const double tol = rho.tol();
    NDimResult out;
    auto frame = real_frame(rho);
    if (!frame) {
        out.reason = "off-diagonal phases cannot be removed by a diagonal unitary";
        return out;
    }
    out.gauge_applied = frame->applied;
    const CoherenceVector b = coherence_vector(frame->real_rho);
    const std::size_t pairs = pair_count(n);

    // Member k carries minus signs on components 0..k-1, so pair (i, j) picks up -1 iff i < k <= j.
    RealMatrix a(pairs + 1, n);
    RealVector rhs(pairs + 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::size_t r = pair_index(i, j, n);
            for (std::size_t k = 0; k < n; ++k) a(r, k) = (i < k && k <= j) ? -1.0 : 1.0;
            rhs[r] = b.entries[r].real();
        }
    for (std::size_t k = 0; k < n; ++k) a(pairs, k) = 1.0;
    rhs[pairs] = 1.0;

    const NnlsResult sol = nnls_solve(a, rhs, NnlsOptions{.tol = tol});
    out.p = sol.x;
    out.residual = sol.residual;
    if (sol.residual > tol) {
        out.reason = "sign-pattern system has no nonnegative solution";
        return out;
    }
    const DiagonalState d = dephase(frame->real_rho);
    std::vector<EnsembleMember> members;
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<int> signs(n, 1);
        for (std::size_t i = 0; i < k; ++i) signs[i] = -1;
        members.push_back({sol.x[k], to_original_frame(signed_root_diagonal(d, signs), frame->phases)});
    }
    double total = 0.0;
    for (const auto& m : members) total += m.weight;
    for (auto& m : members) m.weight /= total;
    out.ensemble = PureEnsemble::make(std::move(members), tol);
    out.feasible = true;
    return out;
}

// ---------------------------------------------------------------------------
// Phase search
//
// Each member is a phase vector φ (φ_0 = 0) with atom a(φ)_ij = e^{i(φ_i - φ_j)}. We minimize
// ‖Σ_k p_k a(φ_k) - B‖² by alternating an exact nonnegative solve for p with exact coordinate
// updates of every φ_m (the objective restricted to one angle is c + Re(e^{iφ_m} w)). When that
// stalls, the atom minimizing the linearized objective is added (column generation).

namespace {

class PhaseSearch {
public:
    PhaseSearch(const CoherenceVector& b, std::size_t max_atoms, double tol)
        : n_(b.dim), pairs_(pair_count(b.dim)), max_atoms_(max_atoms), tol_(tol), b_(b) {}

    void add_atom(RealVector phi) {
        atoms_.push_back(std::move(phi));
        weights_.push_back(0.0);
    }

    std::size_t size() const { return atoms_.size(); }
    const std::vector<RealVector>& atoms() const { return atoms_; }
    const RealVector& weights() const { return weights_; }
    double residual() const { return residual_; }

    cplx atom_entry(const RealVector& phi, std::size_t i, std::size_t j) const { return std::polar(1.0, phi[i] - phi[j]); }

    // Nonnegative least squares for the weights; atoms with zero weight are dropped,
    // then the lightest atoms are dropped until at most max_atoms remain.
    void solve_weights() {
        while (true) {
            RealMatrix a(2 * pairs_ + 1, atoms_.size());
            RealVector rhs(2 * pairs_ + 1);
            for (std::size_t k = 0; k < atoms_.size(); ++k) {
                for (std::size_t i = 0; i < n_; ++i)
                    for (std::size_t j = i + 1; j < n_; ++j) {
                        const std::size_t r = pair_index(i, j, n_);
                        const cplx e = atom_entry(atoms_[k], i, j);
                        a(2 * r, k) = e.real();
                        a(2 * r + 1, k) = e.imag();
                    }
                a(2 * pairs_, k) = 1.0;
            }
            for (std::size_t r = 0; r < pairs_; ++r) {
                rhs[2 * r] = b_.entries[r].real();
                rhs[2 * r + 1] = b_.entries[r].imag();
            }
            rhs[2 * pairs_] = 1.0;
            const NnlsResult sol = nnls_solve(a, rhs, NnlsOptions{.tol = tol_ * 1e-3});
            weights_ = sol.x;
            residual_ = sol.residual;

            std::vector<RealVector> kept_atoms;
            RealVector kept_w;
            for (std::size_t k = 0; k < atoms_.size(); ++k) {
                if (weights_[k] > 0.0) {
                    kept_atoms.push_back(atoms_[k]);
                    kept_w.push_back(weights_[k]);
                }
            }
            if (kept_atoms.empty()) {
                // Keep the pool nonempty; the caller will add atoms.
                return;
            }
            atoms_ = std::move(kept_atoms);
            weights_ = std::move(kept_w);
            if (atoms_.size() <= max_atoms_) return;
            const auto lightest = std::min_element(weights_.begin(), weights_.end()) - weights_.begin();
            atoms_.erase(atoms_.begin() + lightest);
            weights_.erase(weights_.begin() + lightest);
        }
    }

    // Complex residual per pair: Σ_k p_k a_k - B.
    ComplexVector pair_residual() const {
        ComplexVector r(pairs_);
        for (std::size_t p = 0; p < pairs_; ++p) r[p] = -b_.entries[p];
        for (std::size_t k = 0; k < atoms_.size(); ++k)
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = i + 1; j < n_; ++j) r[pair_index(i, j, n_)] += weights_[k] * atom_entry(atoms_[k], i, j);
        return r;
    }

    // One sweep of exact coordinate updates over all atoms and angles (weights fixed).
    void refine_phases() {
        ComplexVector r = pair_residual();
        for (std::size_t k = 0; k < atoms_.size(); ++k) {
            const double pk = weights_[k];
            if (pk <= 0.0) continue;
            for (std::size_t m = 1; m < n_; ++m) {
                // Remove atom k's contribution on pairs touching m, then pick φ_m minimizing the rest.
                cplx w{};
                for (std::size_t j = 0; j < n_; ++j) {
                    if (j == m) continue;
                    if (m < j) {
                        const std::size_t idx = pair_index(m, j, n_);
                        const cplx rest = r[idx] - pk * atom_entry(atoms_[k], m, j);
                        // |pk e^{iφ_m} e^{-iφ_j} + rest|² -> 2 pk Re(e^{iφ_m} e^{-iφ_j} conj(rest))
                        w += std::polar(1.0, -atoms_[k][j]) * std::conj(rest);
                    } else {
                        const std::size_t idx = pair_index(j, m, n_);
                        const cplx rest = r[idx] - pk * atom_entry(atoms_[k], j, m);
                        // |pk e^{iφ_j} e^{-iφ_m} + rest|² -> 2 pk Re(e^{iφ_m} e^{-iφ_j} rest)
                        w += std::polar(1.0, -atoms_[k][j]) * rest;
                    }
                }
                if (std::abs(w) == 0.0) continue;
                const double new_phi = wrap_angle(std::numbers::pi - std::arg(w));
                for (std::size_t j = 0; j < n_; ++j) {
                    if (j == m) continue;
                    const std::size_t idx = m < j ? pair_index(m, j, n_) : pair_index(j, m, n_);
                    const std::size_t lo = std::min(m, j), hi = std::max(m, j);
                    r[idx] -= pk * atom_entry(atoms_[k], lo, hi);
                }
                atoms_[k][m] = new_phi;
                for (std::size_t j = 0; j < n_; ++j) {
                    if (j == m) continue;
                    const std::size_t idx = m < j ? pair_index(m, j, n_) : pair_index(j, m, n_);
                    const std::size_t lo = std::min(m, j), hi = std::max(m, j);
                    r[idx] += pk * atom_entry(atoms_[k], lo, hi);
                }
            }
        }
    }

    // Atom minimizing Re Σ conj(c_ij) a_ij, by coordinate descent from several starts.
    RealVector best_direction(const ComplexVector& c, Rng& rng, int starts) const {
        std::uniform_real_distribution<double> angle(0.0, kTwoPi);
        auto score = [&](const RealVector& phi) {
            double s = 0.0;
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = i + 1; j < n_; ++j)
                    s += (std::conj(c[pair_index(i, j, n_)]) * atom_entry(phi, i, j)).real();
            return s;
        };
        RealVector best;
        double best_score = std::numeric_limits<double>::infinity();
        for (int s = 0; s < starts; ++s) {
            RealVector phi(n_, 0.0);
            for (std::size_t m = 1; m < n_; ++m) phi[m] = angle(rng);
            for (int sweep = 0; sweep < 50; ++sweep) {
                double moved = 0.0;
                for (std::size_t m = 1; m < n_; ++m) {
                    cplx w{};
                    for (std::size_t j = 0; j < n_; ++j) {
                        if (j == m) continue;
                        if (m < j) {
                            w += std::conj(c[pair_index(m, j, n_)]) * std::polar(1.0, -phi[j]);
                        } else {
                            w += c[pair_index(j, m, n_)] * std::polar(1.0, -phi[j]);
                        }
                    }
                    if (std::abs(w) == 0.0) continue;
                    const double nphi = wrap_angle(std::numbers::pi - std::arg(w));
                    moved = std::max(moved, angle_distance(nphi, phi[m]));
                    phi[m] = nphi;
                }
                if (moved < 1e-13) break;
            }
            const double sc = score(phi);
            if (sc < best_score) {
                best_score = sc;
                best = phi;
            }
        }
        return best;
    }

private:
    std::size_t n_, pairs_, max_atoms_;
    double tol_;
    const CoherenceVector& b_;
    std::vector<RealVector> atoms_;
    RealVector weights_;
    double residual_ = std::numeric_limits<double>::infinity();
};

}  // namespace

SaturationCertificate search_phase_feasibility(const DensityMatrix& rho, const PhaseSearchOptions& opts) {
    const std::size_t n = rho.dim();
    const double tol = opts.tol;

    if (rho.rank() <= 1) {
        auto ens = PureEnsemble::make({{1.0, PureState::normalized(rho.spectrum().eigenvectors.front())}}, tol);
        auto cert = check_theorem1(ens, rho, tol, Method::PhaseSearch);
        cert.notes.push_back("pure state: the only decomposition is the state itself");
        return cert;
    }

    const auto support = support_of(rho);
    const DensityMatrix work = support.size() < n ? compress(rho, support) : rho;
    const std::size_t k = work.dim();
    const std::size_t max_atoms = opts.ensemble_size == 0 ? k : opts.ensemble_size;

    SaturationCertificate fail;
    fail.method = Method::PhaseSearch;
    fail.verdict = Verdict::NotFound;
    fail.ensemble_size = max_atoms;
    if (opts.budget <= 0) {
        fail.notes.push_back("search budget is zero; no candidates examined");
        return fail;
    }

    const CoherenceVector b = coherence_vector(work);
    PhaseSearch search(b, max_atoms, tol);
    Rng rng(derive_seed(opts.seed, max_atoms));
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    for (std::size_t a = 0; a < max_atoms; ++a) {
        RealVector phi(k, 0.0);
        for (std::size_t m = 1; m < k; ++m) phi[m] = angle(rng);
        search.add_atom(std::move(phi));
    }

    const double target = 0.1 * tol;
    double last = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.budget; ++it) {
        search.solve_weights();
        if (search.residual() <= target) break;
        for (int s = 0; s < 4; ++s) search.refine_phases();
        search.solve_weights();
        if (search.residual() <= target) break;
        // Stalled refinement: bring in the most promising new member.
        if (search.residual() > 0.999 * last || search.size() < max_atoms) {
            const RealVector dir = search.best_direction(search.pair_residual(), rng, 4);
            search.add_atom(dir);
        }
        last = search.residual();
    }
    search.solve_weights();
    fail.notes.push_back("best residual " + std::to_string(search.residual()));
    if (search.residual() > tol || search.size() == 0) return fail;

    // Assemble the rank-one members.
    const DiagonalState d = dephase(work);
    std::vector<RealVector> adjacent;
    double total = 0.0;
    for (std::size_t a = 0; a < search.size(); ++a) {
        total += search.weights()[a];
        const RealVector& phi = search.atoms()[a];
        RealVector adj(k - 1);
        for (std::size_t m = 0; m + 1 < k; ++m) adj[m] = phi[m] - phi[m + 1];
        adjacent.push_back(std::move(adj));
    }
    const PhaseAssignment pa = PhaseAssignment::from_adjacent(k, adjacent);
    std::vector<EnsembleMember> members;
    for (std::size_t a = 0; a < search.size(); ++a) {
        members.push_back({search.weights()[a] / total, rank_one_member(d, pa.column(a))});
    }
    PureEnsemble ens = PureEnsemble::make(std::move(members), tol);
    if (support.size() < n) ens = embed(ens, support, n, tol);

    auto cert = check_theorem1(ens, rho, tol, Method::PhaseSearch);
    cert.phases = pa;
    if (support.size() < n) cert.notes.push_back("zero diagonal entries removed before the search");
    return cert;
}

// ---------------------------------------------------------------------------

SaturationCertificate saturation_pipeline(const DensityMatrix& rho, const PipelineConfig& cfg) {
    const std::size_t n = rho.dim();
    const double tol = cfg.tol;
    std::vector<std::string> notes;

    auto finish = [&](SaturationCertificate cert) {
        cert.notes.insert(cert.notes.begin(), notes.begin(), notes.end());
        return cert;
    };

    if (n == 2) {
        auto cert = check_theorem1(qubit_decomposition(rho), rho, tol, Method::Qubit);
        if (cert.verdict == Verdict::Saturated) return finish(std::move(cert));
        notes.push_back("qubit formula failed verification");
    }

    const auto support = support_of(rho);
    const bool compressed = support.size() < n && !support.empty();
    const DensityMatrix work = compressed ? compress(rho, support) : rho;
    const std::size_t k = work.dim();
    if (compressed) notes.push_back("zero diagonal entries removed: working dimension " + std::to_string(k));
    auto lift = [&](const PureEnsemble& e) { return compressed ? embed(e, support, n, tol) : e; };

    if (k == 2 && n != 2) {
        auto cert = check_theorem1(lift(qubit_decomposition(work)), rho, tol, Method::Qubit);
        if (cert.verdict == Verdict::Saturated) return finish(std::move(cert));
    }
    if (k == 3) {
        try {
            const PolytopeResult poly = qutrit_polytope(work);
            if (poly.gauge_applied) notes.push_back("diagonal phase gauge applied for the qutrit construction");
            if (poly.inside) {
                auto cert = check_theorem1(lift(qutrit_decomposition(work)), rho, tol, Method::QutritReal);
                if (cert.verdict == Verdict::Saturated) return finish(std::move(cert));
            } else {
                notes.push_back("qutrit outside the sign-pattern tetrahedron");
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NotApplicable) throw;
            notes.push_back("qutrit construction not applicable: complex phases");
        }
    }
    if (k >= 3) {
        const NDimResult nd = ndim_decomposition(work);
        if (nd.feasible) {
            if (nd.gauge_applied) notes.push_back("diagonal phase gauge applied for the sign-pattern construction");
            auto cert = check_theorem1(lift(*nd.ensemble), rho, tol, Method::NDimSignPattern);
            if (cert.verdict == Verdict::Saturated) return finish(std::move(cert));
        } else {
            notes.push_back("sign-pattern family: " + nd.reason);
        }
    }

    const std::size_t cap = cfg.max_ensemble_size == 0 ? n * n : cfg.max_ensemble_size;
    std::vector<std::size_t> sizes;
    for (std::size_t t : {k, 2 * k, k * k}) {
        if (t >= 1 && t <= std::max<std::size_t>(cap, 1) && std::find(sizes.begin(), sizes.end(), t) == sizes.end()) {
            sizes.push_back(t);
        }
    }
    if (work.rank() <= 1) sizes = {1};
    SaturationCertificate last;
    last.method = Method::PhaseSearch;
    for (std::size_t t : sizes) {
        PhaseSearchOptions so{.ensemble_size = t, .budget = cfg.budget, .seed = cfg.seed, .tol = tol};
        SaturationCertificate cert = search_phase_feasibility(rho, so);
        if (cert.verdict == Verdict::Saturated) return finish(std::move(cert));
        last = std::move(cert);
        if (cfg.budget <= 0) break;
    }

    SaturationCertificate out;
    out.verdict = Verdict::NotFound;
    out.method = Method::PhaseSearch;
    out.ensemble_size = last.ensemble_size;
    for (auto& s : last.notes) notes.push_back(std::move(s));
    if (cfg.attach_lower_bound) {
        OptimizerConfig oc = cfg.optimizer;
        oc.seed = cfg.seed;
        oc.tol = tol;
        const AssistanceResult ar = maximize_assistance(rho, oc);
        out.lower_bound = ar.value;
        std::ostringstream os;
        os << "optimizer lower bound " << ar.value << ", gap to S(Delta(rho)) " << ar.gap;
        notes.push_back(os.str());
    }
    return finish(std::move(out));
}

}  // namespace cohassist
