#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <vector>

#include "tsl/errors.hpp"

namespace tsl {

using Complex = std::complex<double>;

inline constexpr Complex im{0.0, 1.0};

/// Dense complex matrix, row-major. Sized for per-mode operator symbols
/// (n <= ~16), so all operations are naive loops.
class CMatrix {
public:
    CMatrix() = default;

    CMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}

    /// Build from nested braces: CMatrix{{1, 0}, {0, 1}}.
    CMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
        rows_ = static_cast<int>(rows.size());
        cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
        a_.reserve(static_cast<size_t>(rows_) * cols_);
        for (const auto& r : rows) {
            if (static_cast<int>(r.size()) != cols_)
                throw DimensionMismatchError("ragged initializer for CMatrix");
            a_.insert(a_.end(), r.begin(), r.end());
        }
    }

    static CMatrix zero(int rows, int cols) { return CMatrix(rows, cols); }

    static CMatrix identity(int n) {
        CMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static CMatrix diagonal(const std::vector<Complex>& d) {
        CMatrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return a_.empty(); }
    bool is_square() const { return rows_ == cols_; }

    Complex& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    Complex operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    CMatrix adjoint() const {
        CMatrix m(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
        return m;
    }

    CMatrix& operator+=(const CMatrix& o) {
        check_same_shape(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }

    CMatrix& operator-=(const CMatrix& o) {
        check_same_shape(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }

    CMatrix& operator*=(Complex s) {
        for (auto& v : a_) v *= s;
        return *this;
    }

    /// Largest entry magnitude.
    double max_abs() const {
        double m = 0.0;
        for (const auto& v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    double frobenius() const {
        double s = 0.0;
        for (const auto& v : a_) s += std::norm(v);
        return std::sqrt(s);
    }

    /// Apply to a vector (length cols()).
    std::vector<Complex> apply(const std::vector<Complex>& x) const {
        if (static_cast<int>(x.size()) != cols_)
            throw DimensionMismatchError("CMatrix::apply size mismatch");
        std::vector<Complex> y(rows_);
        for (int i = 0; i < rows_; ++i) {
            Complex s = 0.0;
            for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

private:
    void check_same_shape(const CMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw DimensionMismatchError("CMatrix shape mismatch");
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<Complex> a_;
};

inline CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
inline CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
inline CMatrix operator*(Complex s, CMatrix a) { return a *= s; }
inline CMatrix operator*(CMatrix a, Complex s) { return a *= s; }
inline CMatrix operator-(const CMatrix& a) { return a * Complex(-1.0); }

inline CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatchError("CMatrix product shape mismatch");
    CMatrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

/// max |A - A*| over entries.
inline double self_adjoint_defect(const CMatrix& a) { return (a - a.adjoint()).max_abs(); }

/// max |A + A*| over entries.
inline double skew_adjoint_defect(const CMatrix& a) { return (a + a.adjoint()).max_abs(); }

inline bool is_self_adjoint(const CMatrix& a, double tol) {
    return a.is_square() && self_adjoint_defect(a) <= tol;
}

inline bool is_skew_adjoint(const CMatrix& a, double tol) {
    return a.is_square() && skew_adjoint_defect(a) <= tol;
}

/// Default adjointness tolerance, scaled to the matrix magnitude.
inline double adjoint_tol(const CMatrix& a) { return 1e-10 * std::max(1.0, a.max_abs()); }

} // namespace tsl
