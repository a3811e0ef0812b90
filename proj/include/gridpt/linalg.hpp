#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "gridpt/error.hpp"

namespace gridpt {

using cplx = std::complex<double>;

// Dense row-major matrix. Networks here have at most a few hundred channels,
// so a plain contiguous buffer beats any sparse cleverness.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T init = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, init) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    T* row(std::size_t r) { return data_.data() + r * cols_; }
    const T* row(std::size_t r) const { return data_.data() + r * cols_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

using CMat = Matrix<cplx>;
using RMat = Matrix<double>;

template <class T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.rows()) throw Error("shape_mismatch", "matmul: inner dimensions differ");
    Matrix<T> out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const T* ai = a.row(i);
        T* oi = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            T aik = ai[k];
            if (aik == T{}) continue;
            const T* bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) oi[j] += aik * bk[j];
        }
    }
    return out;
}

template <class T>
Matrix<T> transpose(const Matrix<T>& a) {
    Matrix<T> out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

inline CMat conj_transpose(const CMat& a) {
    CMat out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
    return out;
}

inline double abs_val(double x) { return std::fabs(x); }
inline double abs_val(const cplx& x) { return std::abs(x); }

template <class T>
double max_abs(const Matrix<T>& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, abs_val(a(i, j)));
    return m;
}

template <class T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error("shape_mismatch", "max_abs_diff: shapes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, abs_val(a(i, j) - b(i, j)));
    return m;
}

// max column sum of magnitudes
template <class T>
double one_norm(const Matrix<T>& a) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += abs_val(a(i, j));
        m = std::max(m, s);
    }
    return m;
}

// Inverse via LU with partial pivoting. Throws "singular_matrix" on an exact
// zero pivot or when the 1-norm condition estimate falls below rcond_floor.
// `what` names the matrix in the error message.
inline CMat invert(const CMat& a, double rcond_floor = 1e-12, const char* what = "matrix") {
    if (a.rows() != a.cols()) throw Error("shape_mismatch", "invert: matrix not square");
    const std::size_t n = a.rows();
    CMat lu = a;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = std::abs(lu(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0)
            throw Error("singular_matrix", std::string(what) + " is singular (zero pivot)");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
            std::swap(perm[k], perm[piv]);
        }
        cplx pivot = lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            cplx f = lu(i, k) / pivot;
            lu(i, k) = f;
            if (f == cplx{}) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
        }
    }

    CMat inv(n, n);
    std::vector<cplx> col(n);
    for (std::size_t e = 0; e < n; ++e) {
        for (std::size_t i = 0; i < n; ++i) col[i] = (perm[i] == e) ? cplx{1.0} : cplx{};
        for (std::size_t i = 1; i < n; ++i) {
            cplx s = col[i];
            for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * col[j];
            col[i] = s;
        }
        for (std::size_t i = n; i-- > 0;) {
            cplx s = col[i];
            for (std::size_t j = i + 1; j < n; ++j) s -= lu(i, j) * col[j];
            col[i] = s / lu(i, i);
        }
        for (std::size_t i = 0; i < n; ++i) inv(i, e) = col[i];
    }

    double denom = one_norm(a) * one_norm(inv);
    double rcond = denom > 0.0 ? 1.0 / denom : 0.0;
    if (rcond < rcond_floor)
        throw Error("singular_matrix",
                    std::string(what) + " is numerically singular (rcond " +
                        std::to_string(rcond) + ")");
    return inv;
}

} // namespace gridpt
