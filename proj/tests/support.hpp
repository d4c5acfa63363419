#pragma once

// Helpers shared by the unit tests and the acceptance binary. Everything here is computed
// directly from definitions so it can serve as an oracle for the library code.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "cohassist/qmat.hpp"
#include "cohassist/states.hpp"

namespace testsupport {

using cohassist::ComplexMatrix;
using cohassist::cplx;

inline cplx gaussian_cplx(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    const double re = g(rng);
    return {re, g(rng)};
}

// Hermitian matrix with iid complex Gaussian off-diagonals.
inline ComplexMatrix random_hermitian(std::size_t n, std::mt19937_64& rng) {
    ComplexMatrix m(n, n);
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = g(rng);
        for (std::size_t j = i + 1; j < n; ++j) {
            m(i, j) = gaussian_cplx(rng);
            m(j, i) = std::conj(m(i, j));
        }
    }
    return m;
}

// G G† / tr with G of shape n x k (rank k when k <= n).
inline ComplexMatrix random_density(std::size_t n, std::size_t k, std::mt19937_64& rng, bool real = false) {
    ComplexMatrix g(n, k);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) g(i, j) = real ? cplx(nd(rng), 0.0) : gaussian_cplx(rng);
    ComplexMatrix rho = g * g.adjoint();
    rho *= cplx(1.0 / rho.trace().real());
    // Force exact Hermiticity.
    for (std::size_t i = 0; i < n; ++i) {
        rho(i, i) = rho(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) rho(j, i) = std::conj(rho(i, j));
    }
    return rho;
}

inline cohassist::DensityMatrix random_state(std::size_t n, std::mt19937_64& rng, bool real = false) {
    return cohassist::validate_density(random_density(n, n, rng, real));
}

// Sum p_k |psi_k><psi_k| by direct accumulation.
inline ComplexMatrix direct_mix(const cohassist::PureEnsemble& ens) {
    const std::size_t n = ens.dim();
    ComplexMatrix out(n, n);
    for (const auto& m : ens.members()) {
        const auto& a = m.state.amplitudes();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out(i, j) += m.weight * a[i] * std::conj(a[j]);
    }
    return out;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

inline double shannon_bits(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log2(x);
    return h;
}

inline std::vector<double> diag_of(const ComplexMatrix& m) {
    std::vector<double> d(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) d[i] = m(i, i).real();
    return d;
}

// Largest deviation of any member's |amplitude|^2 profile from the target diagonal.
inline double member_diag_defect(const cohassist::PureEnsemble& ens, const std::vector<double>& target) {
    double m = 0.0;
    for (const auto& mem : ens.members())
        for (std::size_t i = 0; i < target.size(); ++i) m = std::max(m, std::abs(std::norm(mem.state[i]) - target[i]));
    return m;
}

// Average of Shannon entropies of member diagonals; equals the average C_r for pure members.
inline double direct_average_coherence(const cohassist::PureEnsemble& ens) {
    double s = 0.0;
    for (const auto& mem : ens.members()) {
        std::vector<double> d;
        for (const cplx& a : mem.state.amplitudes()) d.push_back(std::norm(a));
        s += mem.weight * shannon_bits(d);
    }
    return s;
}

// Qutrit with uniform diagonal and real coherences r01, r12, r02 (entries r/3).
inline ComplexMatrix uniform_qutrit(double r01, double r12, double r02) {
    const double t = 1.0 / 3.0;
    return ComplexMatrix{{t, r01 * t, r02 * t}, {r01 * t, t, r12 * t}, {r02 * t, r12 * t, t}};
}

}  // namespace testsupport
