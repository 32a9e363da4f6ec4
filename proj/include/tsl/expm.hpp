#pragma once

// Dense matrix exponential by Pade [6/6] approximation with scaling and
// squaring, plus the Gaussian solve it needs. Fallback path for generators
// that are not unitarily diagonalizable by the Jacobi route.

#include <cmath>

#include "tsl/cmatrix.hpp"
#include "tsl/errors.hpp"

namespace tsl {

/// Solve A X = B by Gaussian elimination with partial pivoting.
inline CMatrix solve_dense(CMatrix a, CMatrix b) {
    if (!a.is_square() || a.rows() != b.rows())
        throw DimensionMismatchError("solve_dense shape mismatch");
    const int n = a.rows();
    const int m = b.cols();
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(a(col, col));
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > best) {
                best = std::abs(a(r, col));
                piv = r;
            }
        if (best == 0.0) throw Error("solve_dense: singular matrix");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            for (int j = 0; j < m; ++j) std::swap(b(col, j), b(piv, j));
        }
        const Complex d = a(col, col);
        for (int r = col + 1; r < n; ++r) {
            const Complex f = a(r, col) / d;
            if (f == Complex{}) continue;
            for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            for (int j = 0; j < m; ++j) b(r, j) -= f * b(col, j);
        }
    }
    for (int col = n - 1; col >= 0; --col) {
        for (int j = 0; j < m; ++j) {
            Complex s = b(col, j);
            for (int r = col + 1; r < n; ++r) s -= a(col, r) * b(r, j);
            b(col, j) = s / a(col, col);
        }
    }
    return b;
}

inline CMatrix matrix_exp(const CMatrix& a) {
    if (!a.is_square()) throw DimensionMismatchError("matrix_exp: square input required");
    const int n = a.rows();
    double norm = 0.0; // max row sum
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += std::abs(a(i, j));
        norm = std::max(norm, s);
    }
    int squarings = 0;
    double scale = 1.0;
    while (norm * scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }
    const CMatrix as = scale * a;
    static const double c[7] = {1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
    CMatrix power = CMatrix::identity(n);
    CMatrix num = CMatrix::identity(n);
    CMatrix den = CMatrix::identity(n);
    for (int k = 1; k <= 6; ++k) {
        power = power * as;
        num += c[k] * power;
        den += ((k % 2 == 0) ? c[k] : -c[k]) * power;
    }
    CMatrix e = solve_dense(den, num);
    for (int s = 0; s < squarings; ++s) e = e * e;
    return e;
}

} // namespace tsl
