#pragma once

// Dense complex/real matrix kernel: Hermitian eigensolver (cyclic Jacobi),
// nonnegative least squares (Lawson-Hanson) and a few norms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <type_traits>
#include <vector>

#include "cohassist/error.hpp"

namespace cohassist {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;
using RealVector = std::vector<double>;

inline constexpr double kDefaultTol = 1e-9;

/// Dense row-major matrix with finite entries.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw Error(ErrorKind::ShapeMismatch, "entry count does not match rows*cols");
        }
        for (const T& v : data_) {
            if (!is_finite(v)) throw Error(ErrorKind::NotFinite, "matrix entry is NaN or Inf");
        }
    }
    Matrix(std::initializer_list<std::initializer_list<T>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw Error(ErrorKind::ShapeMismatch, "ragged initializer");
            for (const T& v : r) {
                if (!is_finite(v)) throw Error(ErrorKind::NotFinite, "matrix entry is NaN or Inf");
                data_.push_back(v);
            }
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    static Matrix diagonal(std::span<const double> d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = T(d[i]);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const T> data() const noexcept { return data_; }

    Matrix adjoint() const {
        Matrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out(c, r) = conj_of(data_[r * cols_ + c]);
        return out;
    }

    T trace() const {
        T t{};
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    Matrix& operator+=(const Matrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Matrix& operator*=(T s) {
        for (T& v : data_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, T s) { return a *= s; }
    friend Matrix operator*(T s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw Error(ErrorKind::ShapeMismatch, "inner dimensions differ");
        Matrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T aik = a(i, k);
                if (aik == T{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    friend std::vector<T> operator*(const Matrix& a, std::span<const T> x) {
        if (a.cols_ != x.size()) throw Error(ErrorKind::ShapeMismatch, "vector length differs from column count");
        std::vector<T> out(a.rows_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j) out[i] += a(i, j) * x[j];
        return out;
    }

    /// Largest entry magnitude.
    double max_abs() const {
        double m = 0.0;
        for (const T& v : data_) m = std::max(m, static_cast<double>(std::abs(v)));
        return m;
    }

private:
    static bool is_finite(const T& v) {
        if constexpr (std::is_same_v<T, cplx>) {
            return std::isfinite(v.real()) && std::isfinite(v.imag());
        } else {
            return std::isfinite(v);
        }
    }
    static T conj_of(const T& v) {
        if constexpr (std::is_same_v<T, cplx>) {
            return std::conj(v);
        } else {
            return v;
        }
    }
    void require_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorKind::ShapeMismatch, "matrix shapes differ");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using ComplexMatrix = Matrix<cplx>;
using RealMatrix = Matrix<double>;

struct SpectralDecomposition {
    RealVector eigenvalues;                  // descending
    std::vector<ComplexVector> eigenvectors;  // orthonormal, paired with eigenvalues

    ComplexMatrix reconstruct() const;
};

struct EigOptions {
    double tol = kDefaultTol;
    int max_sweeps = 100;
};

SpectralDecomposition eig_hermitian(const ComplexMatrix& m, const EigOptions& opts = {});

/// Largest entry of |m - m†|.
double hermiticity_defect(const ComplexMatrix& m);

struct NnlsResult {
    RealVector x;
    double residual = 0.0;      // ‖a x - b‖₂
    double kkt_violation = 0.0;  // max over free directions of the positive gradient part
    int iterations = 0;
};

struct NnlsOptions {
    double tol = kDefaultTol;
    int max_iterations = 0;  // 0 -> 3 * (cols + 1)
};

/// min ‖a x - b‖₂ subject to x >= 0.
NnlsResult nnls_solve(const RealMatrix& a, std::span<const double> b, const NnlsOptions& opts = {});

double frobenius_distance(const ComplexMatrix& m1, const ComplexMatrix& m2);
double frobenius_norm(const ComplexMatrix& m);

// Vector helpers.
double norm2(std::span<const cplx> v);
cplx inner(std::span<const cplx> a, std::span<const cplx> b);  // ⟨a|b⟩
ComplexMatrix outer(std::span<const cplx> v);                  // |v⟩⟨v|

/// Orthonormalize the columns of m in order (modified Gram-Schmidt, two passes).
ComplexMatrix orthonormalize_columns(const ComplexMatrix& m);

}  // namespace cohassist
