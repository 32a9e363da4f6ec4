#pragma once

// Shared helpers for the test suites: a portable deterministic RNG and
// structured random matrix builders.

#include <cmath>
#include <cstdint>
#include <vector>

#include "tsl/cmatrix.hpp"
#include "tsl/linalg.hpp"

namespace testsupport {

/// SplitMix64: identical stream on every platform, unlike the standard
/// library distributions.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [-1, 1).
    double sym() { return 2.0 * uniform() - 1.0; }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    int below(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

private:
    uint64_t state_;
};

inline tsl::CMatrix random_self_adjoint(Rng& rng, int n, double scale = 1.0) {
    tsl::CMatrix a(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = scale * rng.sym();
        for (int j = i + 1; j < n; ++j) {
            const tsl::Complex v{scale * rng.sym(), scale * rng.sym()};
            a(i, j) = v;
            a(j, i) = std::conj(v);
        }
    }
    return a;
}

inline tsl::CMatrix random_skew_adjoint(Rng& rng, int n, double scale = 1.0) {
    return tsl::im * random_self_adjoint(rng, n, scale);
}

/// Random unitary from Jacobi eigenvectors of a random self-adjoint matrix.
inline tsl::CMatrix random_unitary(Rng& rng, int n) {
    return tsl::herm_eig(random_self_adjoint(rng, n)).vectors;
}

/// Skew-adjoint matrix with prescribed kernel dimension: U diag(i l, 0) U*
/// with nonzero |l| in [0.3, 1].
inline tsl::CMatrix random_skew_with_kernel(Rng& rng, int n, int kernel_dim, double scale = 1.0) {
    const tsl::CMatrix u = random_unitary(rng, n);
    std::vector<tsl::Complex> d(n);
    for (int i = 0; i < n - kernel_dim; ++i) {
        const double mag = scale * (0.3 + 0.7 * rng.uniform());
        d[i] = tsl::im * (rng.uniform() < 0.5 ? -mag : mag);
    }
    return u * tsl::CMatrix::diagonal(d) * u.adjoint();
}

} // namespace testsupport

#include "tsl/reduction.hpp"

namespace testsupport {

/// A joint kernel of T00 and T01 is an exact kernel of the whole pencil; on
/// it every mu-asymptotic quantity is identically zero and only amplified
/// roundoff would be measured.
inline bool has_joint_kernel(const tsl::SymbolPair& pair) {
    const tsl::CMatrix gram =
        pair.t00.adjoint() * pair.t00 + pair.t01.adjoint() * pair.t01;
    const tsl::CMatrix nullp = tsl::null_projection(gram, 1e-8);
    double trace = 0.0;
    for (int i = 0; i < nullp.rows(); ++i) trace += nullp(i, i).real();
    return trace > 0.5;
}

/// Random skew-adjoint pair with a rank-deficient unperturbed operator and a
/// small perturbation (entries well below 1). Instances whose reduced-level
/// operators carry nonzero eigenvalues below lam_min are rejected, so the
/// mu^(j-p) eigenvalue clusters of the pencil stay well separated; the filter
/// looks only at the mu = 0 reduction, never at the pencil spectrum itself.
/// lam_min must exceed sqrt(mu_max) for the largest mu the suite sweeps, or
/// the j-th cluster lambda mu^j can fall inside the mu^{p-1/2} contour.
inline tsl::SymbolPair random_reduction_pair(Rng& rng, int p, int dim_lo = 4, int dim_hi = 6,
                                             double lam_min = 0.15) {
    for (;;) {
        const int n = dim_lo + rng.below(dim_hi - dim_lo + 1);
        const int kdim = 1 + rng.below(n - 1);
        tsl::SymbolPair pair =
            tsl::make_symbol_pair(random_skew_with_kernel(rng, n, kdim),
                                  random_skew_adjoint(rng, n, 0.2), tsl::AdjointKind::SkewAdjoint);
        if (has_joint_kernel(pair)) continue;
        const auto red = tsl::reduce(pair, p);
        bool separated = true;
        for (int j = 0; j < p && separated; ++j) {
            const auto e = tsl::herm_eig(tsl::im * red.levels[j].reduced);
            for (double l : e.values)
                if (std::abs(l) > 1e-9 && std::abs(l) < lam_min) separated = false;
        }
        if (separated) return pair;
    }
}

/// Skew-adjoint pair whose perturbation couples ker(T00) only to range(T00):
/// the level-one operator vanishes, so the kernel survives to level two and
/// the slow projection acquires a genuine O(mu) tilt.
inline tsl::SymbolPair coupled_pair(Rng& rng, int n, int kernel_dim, double scale = 0.35) {
    using tsl::Complex;
    for (;;) {
        const int r = n - kernel_dim;
        tsl::CMatrix a(n, n);
        for (int i = 0; i < r; ++i) {
            const double mag = 0.3 + 0.7 * rng.uniform();
            a(i, i) = rng.uniform() < 0.5 ? -mag : mag;
        }
        tsl::CMatrix b(n, n);
        for (int i = 0; i < r; ++i)
            for (int j = r; j < n; ++j) {
                const Complex v{rng.sym(), rng.sym()};
                b(i, j) = v;
                b(j, i) = std::conj(v);
            }
        const tsl::CMatrix u = random_unitary(rng, n);
        tsl::SymbolPair pair = tsl::make_symbol_pair(tsl::im * (u * a * u.adjoint()),
                                                     tsl::im * (scale * (u * b * u.adjoint())),
                                                     tsl::AdjointKind::SkewAdjoint);
        // a kernel wider than the range cannot fully couple: exact pencil kernel
        if (!has_joint_kernel(pair)) return pair;
    }
}

/// Skew-adjoint pair engineered so that a direction survives to level three
/// with a nonzero limit operator T(3,3): the unperturbed spectrum is
/// indefinite, the kernel couples into the range along a vector w with
/// w* D w = 0, and a random range block R makes the third-order coefficient
/// (Dw)* R (Dw) generically nonzero. Draws whose limit operator comes out
/// below 0.02 are rejected, keeping the limit error above the roundoff that
/// the mu^{-p} pencil scaling amplifies.
inline tsl::SymbolPair deep_survivor_pair(Rng& rng) {
    using tsl::CMatrix;
    using tsl::Complex;
    for (;;) {
        const int n = 5;
        CMatrix a(n, n); // hermitian picture of T00
        a(0, 0) = 1.0;
        a(1, 1) = 1.0;
        a(2, 2) = -1.0;
        // kernel -> range coupling: columns w = (1, 1, sqrt(2)) and c2 = (1, -1, 0)
        const double r2 = std::sqrt(2.0);
        const Complex w[3] = {1.0, 1.0, r2};
        const Complex c2[3] = {1.0, -1.0, 0.0};
        CMatrix b(n, n);
        for (int i = 0; i < 3; ++i) {
            b(i, 3) = w[i];
            b(3, i) = std::conj(w[i]);
            b(i, 4) = c2[i];
            b(4, i) = std::conj(c2[i]);
        }
        for (int i = 0; i < 3; ++i) // random hermitian range block
            for (int j = i; j < 3; ++j) {
                const Complex v = i == j ? Complex{rng.sym(), 0.0} : Complex{rng.sym(), rng.sym()};
                b(i, j) += v;
                b(j, i) += std::conj(v);
            }
        const double s = 0.35; // keep all entries at modest size
        tsl::SymbolPair pair =
            tsl::make_symbol_pair(tsl::im * a, tsl::im * (s * b), tsl::AdjointKind::SkewAdjoint);
        if (tsl::reduce(pair, 3).tpp.max_abs() >= 0.02) return pair;
    }
}

} // namespace testsupport
