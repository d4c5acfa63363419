#include "cohassist/coherence.hpp"

#include <algorithm>
#include <sstream>

#include "cohassist/random.hpp"

namespace cohassist {

namespace {

constexpr double kClampFloor = -1e-12;

double clamp_coherence(double value, const char* what) {
    if (value >= 0.0) return value;
    if (value >= kClampFloor) return 0.0;
    std::ostringstream os;
    os << what << " evaluated to " << value;
    throw Error(ErrorKind::InternalInconsistency, os.str());
}

}  // namespace

ComplexMatrix random_isometry(std::size_t rows, std::size_t cols, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    ComplexMatrix g(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            g(r, c) = cplx(re, im);
        }
    return orthonormalize_columns(g);
}

double relative_entropy_coherence(const DensityMatrix& rho, double log_base) {
    const double v = entropy(dephase(rho), log_base) - von_neumann_entropy(rho, log_base);
    return clamp_coherence(v, "relative entropy coherence");
}

double pure_state_coherence(const PureState& psi, double log_base) {
    return entropy(psi.diagonal(), log_base);
}

double l1_coherence(const DensityMatrix& rho) {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.dim(); ++i)
        for (std::size_t j = 0; j < rho.dim(); ++j)
            if (i != j) s += std::abs(rho(i, j));
    return s;
}

double regularized_assistance(const DensityMatrix& rho, double log_base) {
    return entropy(dephase(rho), log_base);
}

double ensemble_average_coherence(const PureEnsemble& ens, double log_base) {
    double s = 0.0;
    for (const auto& m : ens.members()) s += m.weight * pure_state_coherence(m.state, log_base);
    return s;
}

std::size_t default_ensemble_size(const DensityMatrix& rho) {
    const std::size_t n = rho.dim();
    return std::min(n * std::max<std::size_t>(rho.rank(), 1), n * n);
}

// ---------------------------------------------------------------------------

namespace {

// Unnormalized ensemble vectors w_j = Σ_i U_ji √λ_i |e_i⟩ kept alongside U so a Givens move on rows
// (p, q) of U costs O(n). The objective Σ_j ‖w_j‖² H(|w_j|²/‖w_j‖²) separates over rows.
class IsometrySearch {
public:
    IsometrySearch(const DensityMatrix& rho, std::size_t t, std::size_t r, double log_base)
        : n_(rho.dim()), t_(t), r_(r), inv_log_(1.0 / std::log(log_base)), basis_(r, ComplexVector(rho.dim())) {
        const auto& spec = rho.spectrum();
        for (std::size_t i = 0; i < r; ++i) {
            const double s = std::sqrt(std::max(spec.eigenvalues[i], 0.0));
            for (std::size_t b = 0; b < n_; ++b) basis_[i][b] = s * spec.eigenvectors[i][b];
        }
    }

    void reset(ComplexMatrix u) {
        u_ = std::move(u);
        w_.assign(t_, ComplexVector(n_));
        for (std::size_t j = 0; j < t_; ++j)
            for (std::size_t i = 0; i < r_; ++i)
                for (std::size_t b = 0; b < n_; ++b) w_[j][b] += u_(j, i) * basis_[i][b];
        row_value_.resize(t_);
        for (std::size_t j = 0; j < t_; ++j) row_value_[j] = row_value(w_[j]);
    }

    double value() const {
        double s = 0.0;
        for (double v : row_value_) s += v;
        return s;
    }

    // Apply G = [[c, -e^{iφ}s], [e^{-iφ}s, c]] to rows p, q if it increases the objective.
    bool try_rotation(std::size_t p, std::size_t q, double angle, cplx phase) {
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const cplx a = c;
        const cplx b = -phase * s;
        const cplx d = std::conj(phase) * s;
        ComplexVector wp(n_), wq(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            wp[k] = a * w_[p][k] + b * w_[q][k];
            wq[k] = d * w_[p][k] + a * w_[q][k];
        }
        const double vp = row_value(wp);
        const double vq = row_value(wq);
        const double before = row_value_[p] + row_value_[q];
        if (vp + vq <= before + 1e-15) return false;
        w_[p] = std::move(wp);
        w_[q] = std::move(wq);
        row_value_[p] = vp;
        row_value_[q] = vq;
        for (std::size_t i = 0; i < r_; ++i) {
            const cplx up = u_(p, i);
            const cplx uq = u_(q, i);
            u_(p, i) = a * up + b * uq;
            u_(q, i) = d * up + a * uq;
        }
        return true;
    }

    const ComplexMatrix& isometry() const { return u_; }

private:
    double row_value(const ComplexVector& w) const {
        double norm_sq = 0.0;
        double s = 0.0;
        for (const cplx& z : w) {
            const double x = std::norm(z);
            norm_sq += x;
            if (x > 0.0) s -= x * std::log(x);
        }
        if (norm_sq > 0.0) s += norm_sq * std::log(norm_sq);
        return s * inv_log_;
    }

    std::size_t n_, t_, r_;
    double inv_log_;
    std::vector<ComplexVector> basis_;
    ComplexMatrix u_;
    std::vector<ComplexVector> w_;
    std::vector<double> row_value_;
};

}  // namespace

AssistanceResult maximize_assistance(const DensityMatrix& rho, const OptimizerConfig& cfg) {
    if (cfg.restarts < 1) throw Error(ErrorKind::ConfigInvalid, "restarts must be positive");
    if (cfg.max_iters < 1) throw Error(ErrorKind::ConfigInvalid, "max_iters must be positive");
    if (!(cfg.convergence_tol > 0.0)) throw Error(ErrorKind::ConfigInvalid, "convergence_tol must be positive");
    const std::size_t rank = std::max<std::size_t>(rho.rank(), 1);
    const std::size_t t = cfg.ensemble_size == 0 ? default_ensemble_size(rho) : cfg.ensemble_size;
    if (t < rank) {
        std::ostringstream os;
        os << "ensemble size " << t << " is below rank " << rank;
        throw Error(ErrorKind::ConfigInvalid, os.str());
    }
    const double ceiling = regularized_assistance(rho, cfg.log_base);

    if (rank == 1) {
        // A pure state has exactly one decomposition.
        auto witness = PureEnsemble::make({{1.0, PureState::normalized(rho.spectrum().eigenvectors.front())}}, cfg.tol);
        const double v = ensemble_average_coherence(witness, cfg.log_base);
        return AssistanceResult{v, std::move(witness), ceiling, ceiling - v, 1, 0};
    }

    // Objective changes quadratically in the step, so steps below √tol cannot improve it by tol.
    const double min_step = std::sqrt(cfg.convergence_tol);
    const cplx imag_unit(0.0, 1.0);

    IsometrySearch search(rho, t, rank, cfg.log_base);
    double best_value = -1.0;
    int best_restart = 0;
    ComplexMatrix best_u;

    for (int restart = 0; restart < cfg.restarts; ++restart) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
        search.reset(random_isometry(t, rank, rng));
        double step = 0.5;
        for (int sweep = 0; sweep < cfg.max_iters && step >= min_step; ++sweep) {
            bool improved = false;
            for (std::size_t p = 0; p + 1 < t; ++p) {
                for (std::size_t q = p + 1; q < t; ++q) {
                    for (const cplx phase : {cplx(1.0), imag_unit}) {
                        for (const double sign : {1.0, -1.0}) {
                            // Repeat an accepted move while it keeps paying off.
                            int repeats = 0;
                            while (repeats < 8 && search.try_rotation(p, q, sign * step, phase)) {
                                improved = true;
                                ++repeats;
                            }
                        }
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        const double v = search.value();
        if (v > best_value) {
            best_value = v;
            best_restart = restart;
            best_u = search.isometry();
        }
    }

    auto witness = hjw_rotate(rho, best_u, cfg.tol);
    const double v = ensemble_average_coherence(witness, cfg.log_base);
    return AssistanceResult{v, std::move(witness), ceiling, ceiling - v, t, best_restart};
}

CoherenceReport coherence_report(const DensityMatrix& rho, double log_base,
                                 const std::optional<OptimizerConfig>& optimizer) {
    CoherenceReport rep;
    rep.log_base = log_base;
    rep.c_r = relative_entropy_coherence(rho, log_base);
    rep.c_l1 = l1_coherence(rho);
    rep.c_a_infinity = regularized_assistance(rho, log_base);
    if (optimizer) {
        OptimizerConfig cfg = *optimizer;
        cfg.log_base = log_base;
        auto res = maximize_assistance(rho, cfg);
        rep.c_a_lower_bound = res.value;
        rep.witness = std::move(res.witness);
    }
    return rep;
}

}  // namespace cohassist
