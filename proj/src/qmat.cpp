#include "cohassist/qmat.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace cohassist {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::NotFinite: return "NotFinite";
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::TraceNotOne: return "TraceNotOne";
        case ErrorKind::NotPositive: return "NotPositive";
        case ErrorKind::ZeroDiagonalInconsistency: return "ZeroDiagonalInconsistency";
        case ErrorKind::NotNormalized: return "NotNormalized";
        case ErrorKind::InvalidEnsemble: return "InvalidEnsemble";
        case ErrorKind::NotIsometry: return "NotIsometry";
        case ErrorKind::BasisNotOrthonormal: return "BasisNotOrthonormal";
        case ErrorKind::ConfigInvalid: return "ConfigInvalid";
        case ErrorKind::ConstraintViolation: return "ConstraintViolation";
        case ErrorKind::NotApplicable: return "NotApplicable";
        case ErrorKind::OutsidePolytope: return "OutsidePolytope";
        case ErrorKind::NoDecompositionFound: return "NoDecompositionFound";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::InternalInconsistency: return "InternalInconsistency";
    }
    return "Unknown";
}

// ---------------------------------------------------------------------------
// Vector helpers

double norm2(std::span<const cplx> v) {
    double s = 0.0;
    for (const cplx& z : v) s += std::norm(z);
    return std::sqrt(s);
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw Error(ErrorKind::ShapeMismatch, "inner product of unequal lengths");
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

ComplexMatrix outer(std::span<const cplx> v) {
    ComplexMatrix m(v.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
    return m;
}

double frobenius_norm(const ComplexMatrix& m) {
    double s = 0.0;
    for (const cplx& z : m.data()) s += std::norm(z);
    return std::sqrt(s);
}

double frobenius_distance(const ComplexMatrix& m1, const ComplexMatrix& m2) {
    if (m1.rows() != m2.rows() || m1.cols() != m2.cols()) {
        throw Error(ErrorKind::ShapeMismatch, "frobenius_distance needs equal shapes");
    }
    double s = 0.0;
    auto a = m1.data();
    auto b = m2.data();
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

double hermiticity_defect(const ComplexMatrix& m) {
    if (!m.is_square()) throw Error(ErrorKind::ShapeMismatch, "matrix is not square");
    double d = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j) d = std::max(d, std::abs(m(i, j) - std::conj(m(j, i))));
    return d;
}

ComplexMatrix orthonormalize_columns(const ComplexMatrix& m) {
    ComplexMatrix q = m;
    const std::size_t rows = m.rows();
    for (std::size_t c = 0; c < m.cols(); ++c) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < c; ++k) {
                cplx proj{};
                for (std::size_t r = 0; r < rows; ++r) proj += std::conj(q(r, k)) * q(r, c);
                for (std::size_t r = 0; r < rows; ++r) q(r, c) -= proj * q(r, k);
            }
        }
        double nrm = 0.0;
        for (std::size_t r = 0; r < rows; ++r) nrm += std::norm(q(r, c));
        nrm = std::sqrt(nrm);
        if (nrm < 1e-14) throw Error(ErrorKind::ShapeMismatch, "columns are linearly dependent");
        for (std::size_t r = 0; r < rows; ++r) q(r, c) /= nrm;
    }
    return q;
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition

ComplexMatrix SpectralDecomposition::reconstruct() const {
    const std::size_t n = eigenvalues.size();
    ComplexMatrix m(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& v = eigenvectors[k];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) += eigenvalues[k] * v[i] * std::conj(v[j]);
    }
    return m;
}

namespace {

double off_diagonal_norm(const ComplexMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

// Index of the first component with the largest magnitude (ties within 1e-12 go to the lower index).
std::size_t leading_index(const ComplexVector& v) {
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v[i]);
        if (mag > best_mag + 1e-12) {
            best_mag = mag;
            best = i;
        }
    }
    return best;
}

// Fix the global phase so the leading component is real and positive.
void canonicalize_phase(ComplexVector& v) {
    const cplx lead = v[leading_index(v)];
    const double mag = std::abs(lead);
    if (mag == 0.0) return;
    const cplx phase = std::conj(lead) / mag;
    for (cplx& z : v) z *= phase;
}

bool lexicographically_before(const ComplexVector& a, const ComplexVector& b) {
    const std::size_t ia = leading_index(a);
    const std::size_t ib = leading_index(b);
    if (ia != ib) return ia < ib;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i].real() - b[i].real()) > 1e-12) return a[i].real() > b[i].real();
        if (std::abs(a[i].imag() - b[i].imag()) > 1e-12) return a[i].imag() > b[i].imag();
    }
    return false;
}

void gram_schmidt(std::vector<ComplexVector>& vs) {
    for (std::size_t c = 0; c < vs.size(); ++c) {
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t k = 0; k < c; ++k) {
                const cplx proj = inner(vs[k], vs[c]);
                for (std::size_t r = 0; r < vs[c].size(); ++r) vs[c][r] -= proj * vs[k][r];
            }
        const double nrm = norm2(vs[c]);
        for (cplx& z : vs[c]) z /= nrm;
    }
}

}  // namespace

SpectralDecomposition eig_hermitian(const ComplexMatrix& m, const EigOptions& opts) {
    if (!m.is_square()) throw Error(ErrorKind::ShapeMismatch, "eig_hermitian needs a square matrix");
    if (hermiticity_defect(m) > opts.tol) throw Error(ErrorKind::NotHermitian, "matrix differs from its adjoint");

    const std::size_t n = m.rows();
    ComplexMatrix a = m;
    // Work on the exactly Hermitian part.
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = a(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = avg;
            a(j, i) = std::conj(avg);
        }
    }
    ComplexMatrix v = ComplexMatrix::identity(n);

    const double scale = std::max(frobenius_norm(a), std::numeric_limits<double>::min());
    const double stop = 1e-15 * scale;
    int sweep = 0;
    while (off_diagonal_norm(a) > stop) {
        if (sweep++ >= opts.max_sweeps) {
            throw Error(ErrorKind::NoConvergence, "Jacobi sweep budget exhausted");
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx b = a(p, q);
                const double mag = std::abs(b);
                if (mag <= 1e-300) continue;
                const cplx phase = b / mag;  // e^{iφ}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                const cplx jpp = c;
                const cplx jpq = s;
                const cplx jqp = -s * std::conj(phase);
                const cplx jqq = c * std::conj(phase);

                for (std::size_t r = 0; r < n; ++r) {
                    const cplx arp = a(r, p);
                    const cplx arq = a(r, q);
                    a(r, p) = arp * jpp + arq * jqp;
                    a(r, q) = arp * jpq + arq * jqq;
                }
                for (std::size_t col = 0; col < n; ++col) {
                    const cplx apc = a(p, col);
                    const cplx aqc = a(q, col);
                    a(p, col) = std::conj(jpp) * apc + std::conj(jqp) * aqc;
                    a(q, col) = std::conj(jpq) * apc + std::conj(jqq) * aqc;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (std::size_t r = 0; r < n; ++r) {
                    const cplx vrp = v(r, p);
                    const cplx vrq = v(r, q);
                    v(r, p) = vrp * jpp + vrq * jqp;
                    v(r, q) = vrp * jpq + vrq * jqq;
                }
            }
        }
    }

    struct Pair {
        double value;
        ComplexVector vec;
    };
    std::vector<Pair> pairs(n);
    for (std::size_t k = 0; k < n; ++k) {
        pairs[k].value = a(k, k).real();
        pairs[k].vec.resize(n);
        for (std::size_t r = 0; r < n; ++r) pairs[k].vec[r] = v(r, k);
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.value > y.value; });

    // Clusters of (numerically) equal eigenvalues get an orthonormal basis with a deterministic order.
    const double cluster_tol = std::max(opts.tol, 1e-12 * scale);
    std::size_t begin = 0;
    while (begin < n) {
        std::size_t end = begin + 1;
        while (end < n && pairs[end - 1].value - pairs[end].value <= cluster_tol) ++end;
        if (end - begin > 1) {
            std::vector<ComplexVector> cluster;
            for (std::size_t k = begin; k < end; ++k) cluster.push_back(pairs[k].vec);
            gram_schmidt(cluster);
            for (auto& c : cluster) canonicalize_phase(c);
            std::sort(cluster.begin(), cluster.end(), lexicographically_before);
            for (std::size_t k = begin; k < end; ++k) pairs[k].vec = std::move(cluster[k - begin]);
        } else {
            canonicalize_phase(pairs[begin].vec);
        }
        begin = end;
    }

    SpectralDecomposition out;
    out.eigenvalues.reserve(n);
    out.eigenvectors.reserve(n);
    for (auto& p : pairs) {
        out.eigenvalues.push_back(p.value);
        out.eigenvectors.push_back(std::move(p.vec));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Nonnegative least squares (Lawson-Hanson active set)

namespace {

// Least squares on the selected columns via Householder QR; dependent columns get coefficient 0.
RealVector least_squares_subset(const RealMatrix& a, std::span<const double> b, const std::vector<std::size_t>& cols) {
    const std::size_t m = a.rows();
    const std::size_t k = cols.size();
    RealMatrix r(m, k);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) r(i, j) = a(i, cols[j]);
    RealVector y(b.begin(), b.end());

    double col_scale = 0.0;
    for (double x : r.data()) col_scale = std::max(col_scale, std::abs(x));
    const double dep_tol = 1e-12 * std::max(col_scale, 1.0);

    const std::size_t steps = std::min(m, k);
    for (std::size_t j = 0; j < steps; ++j) {
        double nrm = 0.0;
        for (std::size_t i = j; i < m; ++i) nrm += r(i, j) * r(i, j);
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) continue;
        const double alpha = r(j, j) > 0 ? -nrm : nrm;
        RealVector u(m - j);
        for (std::size_t i = j; i < m; ++i) u[i - j] = r(i, j);
        u[0] -= alpha;
        double unorm2 = 0.0;
        for (double x : u) unorm2 += x * x;
        if (unorm2 == 0.0) continue;
        for (std::size_t c = j; c < k; ++c) {
            double dot = 0.0;
            for (std::size_t i = j; i < m; ++i) dot += u[i - j] * r(i, c);
            const double f = 2.0 * dot / unorm2;
            for (std::size_t i = j; i < m; ++i) r(i, c) -= f * u[i - j];
        }
        double dot = 0.0;
        for (std::size_t i = j; i < m; ++i) dot += u[i - j] * y[i];
        const double f = 2.0 * dot / unorm2;
        for (std::size_t i = j; i < m; ++i) y[i] -= f * u[i - j];
    }

    RealVector z(k, 0.0);
    for (std::size_t jj = steps; jj-- > 0;) {
        if (std::abs(r(jj, jj)) <= dep_tol) {
            z[jj] = 0.0;
            continue;
        }
        double s = y[jj];
        for (std::size_t c = jj + 1; c < k; ++c) s -= r(jj, c) * z[c];
        z[jj] = s / r(jj, jj);
    }
    return z;
}

RealVector gradient(const RealMatrix& a, std::span<const double> b, const RealVector& x) {
    RealVector resid(b.begin(), b.end());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) resid[i] -= a(i, j) * x[j];
    RealVector w(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) w[j] += a(i, j) * resid[i];
    return w;
}

double residual_norm(const RealMatrix& a, std::span<const double> b, const RealVector& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double r = -b[i];
        for (std::size_t j = 0; j < a.cols(); ++j) r += a(i, j) * x[j];
        s += r * r;
    }
    return std::sqrt(s);
}

}  // namespace

NnlsResult nnls_solve(const RealMatrix& a, std::span<const double> b, const NnlsOptions& opts) {
    if (a.rows() != b.size()) throw Error(ErrorKind::ShapeMismatch, "nnls: rhs length differs from row count");
    for (double v : b)
        if (!std::isfinite(v)) throw Error(ErrorKind::NotFinite, "nnls: rhs is not finite");

    const std::size_t n = a.cols();
    const int budget = opts.max_iterations > 0 ? opts.max_iterations : static_cast<int>(3 * (n + 1)) + 10;

    double a_scale = 0.0;
    for (double v : a.data()) a_scale = std::max(a_scale, std::abs(v));
    double b_scale = 0.0;
    for (double v : b) b_scale = std::max(b_scale, std::abs(v));
    // Gradient threshold: the requested tolerance, but never below round-off of A^T(b - Ax).
    const double wtol = std::max(std::min(opts.tol, 1e-12),
                                 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, a_scale) *
                                     std::max(1.0, b_scale) * static_cast<double>(std::max<std::size_t>(a.rows(), 1)));

    RealVector x(n, 0.0);
    std::vector<bool> passive(n, false);
    std::vector<bool> blocked(n, false);
    NnlsResult result;

    RealVector w = gradient(a, b, x);
    int iter = 0;
    while (true) {
        std::size_t t = n;
        double wmax = wtol;
        for (std::size_t j = 0; j < n; ++j) {
            if (!passive[j] && !blocked[j] && w[j] > wmax) {
                wmax = w[j];
                t = j;
            }
        }
        if (t == n) break;
        if (++iter > budget) throw Error(ErrorKind::NoConvergence, "nnls iteration budget exhausted");

        passive[t] = true;
        std::vector<std::size_t> cols;
        auto collect = [&] {
            cols.clear();
            for (std::size_t j = 0; j < n; ++j)
                if (passive[j]) cols.push_back(j);
        };
        collect();
        RealVector z_sub = least_squares_subset(a, b, cols);
        RealVector z(n, 0.0);
        for (std::size_t c = 0; c < cols.size(); ++c) z[cols[c]] = z_sub[c];

        if (z[t] <= 0.0) {
            // The new column cannot enter (dependent or wrong sign); park it until x changes.
            passive[t] = false;
            blocked[t] = true;
            continue;
        }

        int inner = 0;
        while (true) {
            bool all_positive = true;
            for (std::size_t j : cols)
                if (z[j] <= 0.0) all_positive = false;
            if (all_positive) break;
            if (++inner > budget) throw Error(ErrorKind::NoConvergence, "nnls inner loop budget exhausted");
            double alpha = 1.0;
            for (std::size_t j : cols) {
                if (z[j] <= 0.0) alpha = std::min(alpha, x[j] / (x[j] - z[j]));
            }
            for (std::size_t j = 0; j < n; ++j) x[j] += alpha * (z[j] - x[j]);
            for (std::size_t j : cols) {
                if (x[j] <= 1e-15 * std::max(1.0, b_scale)) {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            collect();
            z_sub = least_squares_subset(a, b, cols);
            std::fill(z.begin(), z.end(), 0.0);
            for (std::size_t c = 0; c < cols.size(); ++c) z[cols[c]] = z_sub[c];
        }
        x = z;
        std::fill(blocked.begin(), blocked.end(), false);
        w = gradient(a, b, x);
    }

    result.x = x;
    result.iterations = iter;
    result.residual = residual_norm(a, b, x);
    w = gradient(a, b, x);
    double kkt = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (x[j] > 0.0) {
            kkt = std::max(kkt, std::abs(w[j]));
        } else {
            kkt = std::max(kkt, std::max(0.0, w[j]));
        }
    }
    result.kkt_violation = kkt;
    return result;
}

}  // namespace cohassist
