#pragma once

// Finite-dimensional perturbation reduction for pencils T(mu) = T00 + mu T01
// with both terms self-adjoint or both skew-adjoint. Produces, level by
// level, the kernel projections P(j) and reduced operators T(j,j) whose
// nonzero eigenvalues track the mu^(j-p) eigenvalue clusters of
// (1/mu^p) T(mu), together with the limit projection and limit operator.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tsl/cmatrix.hpp"
#include "tsl/errors.hpp"
#include "tsl/linalg.hpp"

namespace tsl {

/// Per-mode input to the reduction: a same-size pair with a declared
/// adjointness kind, validated on construction.
struct SymbolPair {
    CMatrix t00;
    CMatrix t01;
    AdjointKind kind = AdjointKind::SkewAdjoint;
};

inline SymbolPair make_symbol_pair(CMatrix t00, CMatrix t01, AdjointKind kind) {
    if (!t00.is_square() || t00.rows() != t01.rows() || t00.cols() != t01.cols())
        throw DimensionMismatchError("symbol pair matrices must be square and same size");
    const auto check = [&](const CMatrix& m, const char* name) {
        const double tol = adjoint_tol(m);
        const bool ok = kind == AdjointKind::SelfAdjoint ? is_self_adjoint(m, tol)
                                                         : is_skew_adjoint(m, tol);
        if (!ok) throw AdjointnessViolatedError(std::string(name) + " fails declared adjointness");
    };
    check(t00, "t00");
    check(t01, "t01");
    return SymbolPair{std::move(t00), std::move(t01), kind};
}

struct ReductionLevel {
    CMatrix projection;  ///< P(j), orthogonal projection onto ker T(j,j)
    CMatrix reduced;     ///< T(j,j)
    CMatrix cumulative;  ///< Ptilde(j) = P(0) ... P(j)
};

struct ReductionOutput {
    int p = 0;
    std::vector<ReductionLevel> levels; ///< j = 0 .. p-1
    CMatrix limit_projection;           ///< Ptilde(p-1), the mu -> 0 slow projection
    CMatrix tpp;                        ///< T(p,p), the limit of the projected pencil
};

namespace detail {

/// Compositions of n into r parts, each >= 1, lexicographic.
inline void compositions(int n, int r, std::vector<std::vector<int>>& out) {
    std::vector<int> cur(r);
    const auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == r - 1) {
            if (left >= 1) {
                cur[pos] = left;
                out.push_back(cur);
            }
            return;
        }
        for (int v = 1; v <= left - (r - 1 - pos); ++v) {
            cur[pos] = v;
            self(self, pos + 1, left - v);
        }
    };
    if (r >= 1 && n >= r) rec(rec, 0, n);
}

/// Weak compositions of n into r parts, each >= 0, lexicographic.
inline void weak_compositions(int n, int r, std::vector<std::vector<int>>& out) {
    std::vector<int> cur(r);
    const auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == r - 1) {
            cur[pos] = left;
            out.push_back(cur);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            cur[pos] = v;
            self(self, pos + 1, left - v);
        }
    };
    if (r >= 1) rec(rec, 0, n);
}

inline void check_kind(const CMatrix& m, AdjointKind kind, const char* what) {
    const double tol = 1e-9 * std::max(1.0, m.max_abs());
    const bool ok = kind == AdjointKind::SelfAdjoint ? is_self_adjoint(m, tol)
                                                     : is_skew_adjoint(m, tol);
    if (!ok) throw AdjointnessViolatedError(std::string("reduction coefficient ") + what +
                                            " lost its adjointness kind");
}

} // namespace detail

/// Run the reduction to depth p: levels j = 0..p-1 plus T(p,p).
///
/// Coefficients of the next level follow the signed sum over index tuples
///   T(j+1, j+n) = sum_{r=1}^{n} (-1)^{r+1} sum_{nu, k}
///                 S(k1) T(j, j+nu1) S(k2) ... S(kr) T(j, j+nur) S(k_{r+1})
/// with sum nu = n, sum k = r-1. S(0) is minus the cumulative projection
/// Ptilde(j) (which excludes subspaces removed at earlier levels), and
/// S(l) for l >= 1 is the l-th power of the pseudo-inverse of T(j,j).
inline ReductionOutput reduce(const SymbolPair& pair, int p, double tau_rank = 1e-10) {
    if (p < 1) throw DimensionMismatchError("reduce: p must be >= 1");
    const int n = pair.t00.rows();

    // Deep levels can come out as pure roundoff (entries ~1e-30); anchor the
    // rank decision to the input scale so noise never counts as structure.
    const double zero_floor = tau_rank * std::max({pair.t00.max_abs(), pair.t01.max_abs(), 1e-300});

    // coef[k] = T(j, j+k); at level 0 only k = 0,1 are nonzero
    std::vector<CMatrix> coef(static_cast<size_t>(p) + 1, CMatrix::zero(n, n));
    coef[0] = pair.t00;
    coef[1] = pair.t01;

    ReductionOutput out;
    out.p = p;
    CMatrix cumulative = CMatrix::identity(n);

    for (int j = 0; j < p; ++j) {
        const CMatrix& tjj = coef[0];
        detail::check_kind(tjj, pair.kind, ("T(" + std::to_string(j) + "," + std::to_string(j) + ")").c_str());
        const CMatrix proj = null_projection(tjj, tau_rank, zero_floor);
        cumulative = j == 0 ? proj : cumulative * proj;
        out.levels.push_back({proj, tjj, cumulative});

        const int kmax_next = p - (j + 1); // need T(j+1, j+1+k) for k = 0..kmax_next
        const CMatrix s0 = -cumulative;
        // powers of the pseudo-inverse, up to the largest k appearing in a tuple
        std::vector<CMatrix> spow{CMatrix::identity(n), pseudo_inverse(tjj, tau_rank, zero_floor)};
        for (int l = 2; l <= kmax_next; ++l) spow.push_back(spow.back() * spow[1]);
        const auto sfactor = [&](int l) -> const CMatrix& { return l == 0 ? s0 : spow[l]; };

        std::vector<CMatrix> next(static_cast<size_t>(kmax_next) + 1, CMatrix::zero(n, n));
        for (int nn = 1; nn <= kmax_next + 1; ++nn) {
            CMatrix acc(n, n);
            for (int r = 1; r <= nn; ++r) {
                std::vector<std::vector<int>> nus, ks;
                detail::compositions(nn, r, nus);
                detail::weak_compositions(r - 1, r + 1, ks);
                const double sign = (r % 2 == 1) ? 1.0 : -1.0;
                for (const auto& nu : nus) {
                    for (const auto& kc : ks) {
                        CMatrix term = sfactor(kc[0]);
                        for (int l = 0; l < r; ++l) term = term * coef[nu[l]] * sfactor(kc[l + 1]);
                        acc += sign * term;
                    }
                }
            }
            next[nn - 1] = std::move(acc);
        }
        coef = std::move(next);
    }

    out.tpp = coef[0];
    detail::check_kind(out.tpp, pair.kind, "T(p,p)");
    out.limit_projection = cumulative;
    return out;
}

namespace detail {

struct SplitEig {
    EigResult eig;    ///< of the hermitian picture of T00 + mu T01
    double threshold; ///< mu^(p - 1/2)
    std::vector<int> slow; ///< indices with |lambda| < threshold
    std::vector<int> fast; ///< the rest
};

inline SplitEig split_spectrum(const SymbolPair& pair, int p, double mu) {
    CMatrix t0mu = pair.t00 + mu * pair.t01;
    if (pair.kind == AdjointKind::SkewAdjoint) t0mu = im * t0mu;
    SplitEig s;
    s.eig = herm_eig(t0mu);
    s.threshold = std::pow(mu, p - 0.5);
    for (int i = 0; i < static_cast<int>(s.eig.values.size()); ++i) {
        const double a = std::abs(s.eig.values[i]);
        if (a >= s.threshold * (1.0 - 1e-6) && a <= s.threshold * (1.0 + 1e-6))
            throw DegenerateThresholdError("eigenvalue within 1e-6 of the splitting threshold; perturb mu");
        (a < s.threshold ? s.slow : s.fast).push_back(i);
    }
    return s;
}

inline CMatrix projector_from(const EigResult& eig, const std::vector<int>& idx) {
    const int n = eig.vectors.rows();
    CMatrix p(n, n);
    for (int k : idx)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) p(i, j) += eig.vectors(i, k) * std::conj(eig.vectors(j, k));
    return p;
}

} // namespace detail

/// The mu-dependent slow projection P(mu): orthogonal projection onto the
/// eigenspaces of T00 + mu T01 with |lambda| below mu^(p-1/2), i.e. onto the
/// eigenvalues of (1/mu^p)(T00 + mu T01) that stay O(1) as mu -> 0.
inline CMatrix slow_projection_mu(const SymbolPair& pair, int p, double mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw DimensionMismatchError("slow_projection_mu: need 0 < mu < 1");
    const auto s = detail::split_spectrum(pair, p, mu);
    return detail::projector_from(s.eig, s.slow);
}

/// The scaled pencil (1/mu^p)(T00 + mu T01).
inline CMatrix pencil_mu(const SymbolPair& pair, int p, double mu) {
    return std::pow(mu, -p) * (pair.t00 + mu * pair.t01);
}

struct OrderSample {
    double mu = 0.0;
    double bounded_norm = 0.0;      ///< |P(mu) T(mu) P(mu)|
    double fast_min_singular = 0.0; ///< smallest singular value of (I-P) T(mu) (I-P) on range(I-P); inf if empty
    double limit_error = 0.0;       ///< |P(mu) T(mu) - T(p,p)|
};

struct OrderReport {
    std::vector<OrderSample> samples;
    bool monotone_limit_error = true; ///< limit_error non-increasing down the mu list
};

/// Empirical check of the two-sided spectral bounds and of the limit
/// P(mu) T(mu) -> T(p,p). mu_list must be sorted descending.
inline OrderReport spectral_order_report(const SymbolPair& pair, int p,
                                         const std::vector<double>& mu_list,
                                         double tau_rank = 1e-10) {
    const ReductionOutput red = reduce(pair, p, tau_rank);
    OrderReport report;
    double prev = -1.0;
    for (double mu : mu_list) {
        const auto s = detail::split_spectrum(pair, p, mu);
        const double mu_p = std::pow(mu, p);
        OrderSample row;
        row.mu = mu;
        // the split diagonalizes the pencil, so both norms read off the spectrum
        double b1 = 0.0;
        for (int i : s.slow) b1 = std::max(b1, std::abs(s.eig.values[i]) / mu_p);
        row.bounded_norm = b1;
        double b2 = std::numeric_limits<double>::infinity();
        for (int i : s.fast) b2 = std::min(b2, std::abs(s.eig.values[i]) / mu_p);
        row.fast_min_singular = b2;
        const CMatrix pmu = detail::projector_from(s.eig, s.slow);
        row.limit_error = operator_norm(pmu * pencil_mu(pair, p, mu) - red.tpp);
        if (prev >= 0.0 && row.limit_error > prev * (1.0 + 1e-12)) report.monotone_limit_error = false;
        prev = row.limit_error;
        report.samples.push_back(row);
    }
    return report;
}

} // namespace tsl
