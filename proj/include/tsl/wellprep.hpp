#pragma once

// Well-prepared initial data. Per mode, the seed is projected onto ker(L_hat)
// and the correction chain L u_j = -M u_{j-1} is solved with the
// pseudo-inverse, so that the stiff combination (1/delta) L u0 + (1/eps) M u0
// stays O(1) through the limit. The assembled datum is
//   u0 = sum_j (delta/eps)^j u_j + delta U0.

#include <cmath>
#include <string>
#include <vector>

#include "tsl/grid.hpp"
#include "tsl/linalg.hpp"
#include "tsl/symbols.hpp"

namespace tsl {

struct WellPreparedOptions {
    double tau_rank = 1e-10;
    double chain_tol = 1e-8; ///< relative range-compatibility tolerance
    double c_terminal = 1.0; ///< constant in the terminal escape delta^m <= c eps^(m+1)
};

struct WellPreparedData {
    SpectralState u0;                 ///< assembled datum
    std::vector<SpectralState> chain; ///< u_0 .. u_m before scaling
};

/// Build the chain and assemble u0. Throws ChainUnsolvableError when
/// M u_{j-1} leaves the range of L on some mode; a nonzero terminal residue
/// M u_m is accepted only under delta^m <= c eps^(m+1).
inline WellPreparedData build_well_prepared(const OperatorSymbol& lsym, const OperatorSymbol& msym,
                                            const GridSpec& grid, int m, const SpectralState& seed,
                                            double delta, double eps,
                                            const SpectralState* u0_extra = nullptr,
                                            const WellPreparedOptions& opt = {}) {
    if (m < 0) throw ConfigError("well-prepared chain length must be >= 0");
    if (!(delta > 0.0 && eps > 0.0 && delta <= eps && eps < 1.0))
        throw ConfigError("well-prepared data require 0 < delta <= eps < 1");
    const int n = lsym.components();
    if (seed.components != n) throw DimensionMismatchError("seed component count mismatch");

    const long modes = grid.points();
    WellPreparedData out;
    out.chain.assign(static_cast<size_t>(m) + 1, SpectralState(grid, n));

    // M u_m != 0 is acceptable only under the terminal scaling escape
    const bool escape = std::pow(delta, m) <= opt.c_terminal * std::pow(eps, m + 1);
    const double seed_scale = std::max(l2_norm(seed), 1e-300);
    double terminal_residue = 0.0;

    for (long f = 0; f < modes; ++f) {
        const auto k = grid.wavevector(f);
        const CMatrix lk = lsym.at(k);
        const CMatrix mk = msym.at(k);
        const CMatrix ker = null_projection(lk, opt.tau_rank);
        const CMatrix lpinv = pseudo_inverse(lk, opt.tau_rank);

        std::vector<Complex> prev(n);
        for (int c = 0; c < n; ++c) prev[c] = seed.at(c, f);
        prev = ker.apply(prev); // enforce L u_0 = 0
        for (int c = 0; c < n; ++c) out.chain[0].at(c, f) = prev[c];

        for (int j = 1; j <= m; ++j) {
            std::vector<Complex> rhs = mk.apply(prev);
            for (auto& v : rhs) v = -v;
            double rhs_norm = 0.0;
            for (const auto& v : rhs) rhs_norm += std::norm(v);
            rhs_norm = std::sqrt(rhs_norm);
            if (rhs_norm <= opt.chain_tol * seed_scale) { // roundoff-size mode: solve as zero
                prev.assign(n, Complex{});
                continue;
            }
            std::vector<Complex> sol = lpinv.apply(rhs);
            // range compatibility: residual of L u_j = -M u_{j-1}
            std::vector<Complex> back = lk.apply(sol);
            double resid = 0.0;
            for (int c = 0; c < n; ++c) resid += std::norm(back[c] - rhs[c]);
            if (std::sqrt(resid) > opt.chain_tol * rhs_norm)
                throw ChainUnsolvableError(j, wavevector_str(k),
                                           "well-prepared chain: M u_" + std::to_string(j - 1) +
                                               " leaves range(L) at mode " + wavevector_str(k));
            for (int c = 0; c < n; ++c) out.chain[j].at(c, f) = sol[c];
            prev = std::move(sol);
        }
        const std::vector<Complex> tail = mk.apply(prev);
        for (const auto& v : tail) terminal_residue = std::max(terminal_residue, std::abs(v));
    }

    // terminal condition: either M u_m = 0 or the scaling escape holds
    double chain_scale = 0.0;
    for (const auto& c : out.chain) chain_scale = std::max(chain_scale, l2_norm(c));
    if (terminal_residue > opt.chain_tol * std::max(1.0, chain_scale) && !escape)
        throw ChainUnsolvableError(m, "terminal",
                                   "well-prepared chain: M u_m != 0 and delta^m > c eps^(m+1)");

    out.u0 = SpectralState(grid, n);
    double w = 1.0;
    for (int j = 0; j <= m; ++j) {
        out.u0.axpy(w, out.chain[j]);
        w *= delta / eps;
    }
    if (u0_extra) out.u0.axpy(delta, *u0_extra);
    return out;
}

/// Sobolev norm of the stiff part of the initial time derivative,
///   | (1/delta) L u0 + (1/eps) M u0 |_{H^{s0}},
/// evaluated mode by mode.
inline double well_prepared_residual(const SpectralState& u0, const OperatorSymbol& lsym,
                                     const OperatorSymbol& msym, double delta, double eps, int s0) {
    const long modes = u0.grid.points();
    const int n = u0.components;
    double acc = 0.0;
    for (long f = 0; f < modes; ++f) {
        const auto k = u0.grid.wavevector(f);
        const CMatrix lk = lsym.at(k);
        const CMatrix mk = msym.at(k);
        std::vector<Complex> v(n);
        for (int c = 0; c < n; ++c) v[c] = u0.at(c, f);
        const std::vector<Complex> lu = lk.apply(v);
        const std::vector<Complex> mu = mk.apply(v);
        const double w = std::pow(1.0 + u0.grid.k_norm2(f), s0);
        for (int c = 0; c < n; ++c) acc += w * std::norm(lu[c] / delta + mu[c] / eps);
    }
    return std::sqrt(acc);
}

} // namespace tsl
