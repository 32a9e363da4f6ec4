#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tsl/cmatrix.hpp"
#include "tsl/errors.hpp"

namespace tsl {

enum class AdjointKind { SelfAdjoint, SkewAdjoint };

struct EigResult {
    std::vector<double> values; ///< ascending
    CMatrix vectors;            ///< unitary, column i pairs with values[i]
};

namespace detail {

/// Fix the overall phase of each eigenvector column (first significant entry
/// made real-positive), then sort columns by ascending eigenvalue with a
/// lexicographic tie-break. Output is then a deterministic function of the
/// input matrix, which regression tests rely on.
inline void canonicalize_eig(std::vector<double>& lam, CMatrix& v) {
    const int n = v.rows();
    for (int j = 0; j < n; ++j) {
        double vmax = 0.0;
        for (int i = 0; i < n; ++i) vmax = std::max(vmax, std::abs(v(i, j)));
        for (int i = 0; i < n; ++i) {
            if (std::abs(v(i, j)) > 1e-12 * vmax) {
                const Complex phase = std::conj(v(i, j)) / std::abs(v(i, j));
                for (int r = 0; r < n; ++r) v(r, j) *= phase;
                break;
            }
        }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (lam[a] != lam[b]) return lam[a] < lam[b];
        for (int i = 0; i < n; ++i) {
            const Complex x = v(i, a), y = v(i, b);
            if (x.real() != y.real()) return x.real() < y.real();
            if (x.imag() != y.imag()) return x.imag() < y.imag();
        }
        return false;
    });
    std::vector<double> lam2(n);
    CMatrix v2(n, n);
    for (int j = 0; j < n; ++j) {
        lam2[j] = lam[order[j]];
        for (int i = 0; i < n; ++i) v2(i, j) = v(i, order[j]);
    }
    lam = std::move(lam2);
    v = std::move(v2);
}

} // namespace detail

/// Eigendecomposition of a self-adjoint matrix by cyclic Jacobi rotations.
/// A complex rotation is a diagonal phase times a real Givens rotation, so
/// each sweep annihilates every off-diagonal pair once.
///
/// Postcondition: A V = V diag(values) with residual <= tol * |A|.
inline EigResult herm_eig(const CMatrix& a, double tol = 1e-13, int max_sweeps = 40) {
    if (!a.is_square()) throw DimensionMismatchError("herm_eig: matrix not square");
    if (!is_self_adjoint(a, adjoint_tol(a)))
        throw NotSelfAdjointError("herm_eig: matrix not self-adjoint to tolerance");

    const int n = a.rows();
    CMatrix w = a;
    // symmetrize exactly so roundoff in the input cannot bias the sweeps
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const Complex avg = 0.5 * (w(i, j) + std::conj(w(j, i)));
            w(i, j) = avg;
            w(j, i) = std::conj(avg);
        }
    CMatrix v = CMatrix::identity(n);
    const double scale = std::max(w.frobenius(), 1e-300);

    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(w(p, q));
        if (std::sqrt(off) <= tol * scale) {
            converged = true;
            break;
        }
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = std::abs(w(p, q));
                if (apq <= 1e-300) continue;
                const Complex phase = w(p, q) / apq; // e^{i alpha}
                const double app = w(p, p).real();
                const double aqq = w(q, q).real();
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // J has columns (c, -s e^{-ia}) and (s, c e^{-ia}); update W <- J* W J, V <- V J
                for (int i = 0; i < n; ++i) { // right: columns p,q
                    const Complex wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * std::conj(phase) * wq;
                    w(i, q) = s * wp + c * std::conj(phase) * wq;
                    const Complex vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * std::conj(phase) * vq;
                    v(i, q) = s * vp + c * std::conj(phase) * vq;
                }
                for (int j = 0; j < n; ++j) { // left: rows p,q
                    const Complex wp = w(p, j), wq = w(q, j);
                    w(p, j) = c * wp - s * phase * wq;
                    w(q, j) = s * wp + c * phase * wq;
                }
                w(p, q) = 0.0;
                w(q, p) = 0.0;
            }
        }
    }
    if (!converged) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(w(p, q));
        if (std::sqrt(off) > tol * scale)
            throw NoConvergenceError("herm_eig: Jacobi sweeps exhausted");
    }

    EigResult r;
    r.values.resize(n);
    for (int i = 0; i < n; ++i) r.values[i] = w(i, i).real();
    r.vectors = std::move(v);
    detail::canonicalize_eig(r.values, r.vectors);
    return r;
}

namespace detail {

/// Classify a square matrix as self- or skew-adjoint, returning the
/// self-adjoint representative (A itself, or iA for the skew case).
inline std::pair<CMatrix, AdjointKind> hermitian_picture(const CMatrix& a) {
    const double tol = adjoint_tol(a);
    if (is_self_adjoint(a, tol)) return {a, AdjointKind::SelfAdjoint};
    if (is_skew_adjoint(a, tol)) return {im * a, AdjointKind::SkewAdjoint};
    throw NotNormalError("matrix is neither self-adjoint nor skew-adjoint");
}

} // namespace detail

/// Moore-Penrose pseudo-inverse of a self- or skew-adjoint matrix: inverse on
/// the range, zero on the tau-kernel. Eigenvalues below tau_rank * max|lambda|
/// count as zero, as does anything below the absolute floor zero_floor (used
/// by callers whose matrices may consist entirely of roundoff); the zero
/// matrix maps to the zero matrix.
inline CMatrix pseudo_inverse(const CMatrix& a, double tau_rank = 1e-10, double zero_floor = 0.0) {
    auto [h, kind] = detail::hermitian_picture(a);
    const EigResult eig = herm_eig(h);
    const int n = h.rows();
    double lmax = 0.0;
    for (double l : eig.values) lmax = std::max(lmax, std::abs(l));
    CMatrix p(n, n);
    for (int k = 0; k < n; ++k) {
        if (std::abs(eig.values[k]) <= std::max(tau_rank * lmax, zero_floor)) continue;
        const double inv = 1.0 / eig.values[k];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                p(i, j) += inv * eig.vectors(i, k) * std::conj(eig.vectors(j, k));
    }
    // pinv(A) = i pinv(iA) when A is skew
    if (kind == AdjointKind::SkewAdjoint) p *= im;
    return p;
}

/// Orthogonal projection onto the tau-null space of a self- or skew-adjoint
/// matrix. null_projection(0) = I.
inline CMatrix null_projection(const CMatrix& a, double tau_rank = 1e-10, double zero_floor = 0.0) {
    auto [h, kind] = detail::hermitian_picture(a);
    (void)kind;
    const EigResult eig = herm_eig(h);
    const int n = h.rows();
    double lmax = 0.0;
    for (double l : eig.values) lmax = std::max(lmax, std::abs(l));
    CMatrix p(n, n);
    for (int k = 0; k < n; ++k) {
        if (std::abs(eig.values[k]) > std::max(tau_rank * lmax, zero_floor)) continue;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                p(i, j) += eig.vectors(i, k) * std::conj(eig.vectors(j, k));
    }
    return p;
}

/// Largest singular value, computed through herm_eig on A*A.
inline double operator_norm(const CMatrix& a) {
    if (a.empty()) return 0.0;
    const CMatrix g = a.adjoint() * a;
    const EigResult eig = herm_eig(g);
    double lmax = 0.0;
    for (double l : eig.values) lmax = std::max(lmax, l);
    return std::sqrt(std::max(lmax, 0.0));
}

} // namespace tsl
