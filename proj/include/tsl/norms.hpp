#pragma once

// Energy-norm instrumentation along trajectories: plain Sobolev multiplier
// norms, A0-weighted derivative norms on the collocation grid, and the
// eps-weighted time-derivative norms
//   triple^2 = sum_k eps^{2k} |d_t^k u|_{s-k,A0}^2,
//   quad^2   = triple^2 + |u_t|_{0,A0}^2,
// with s = s0+1. Spatial derivatives are exact in Fourier space; u_t comes
// from the right-hand side; higher time derivatives use order-2 finite
// differences of the stored u_t samples, except at t = 0 where the exact
// recursion is used when the system supports it.

#include <cmath>
#include <limits>
#include <vector>

#include "tsl/solver.hpp"

namespace tsl {

enum class WeightScheme { Simplified, Full };

struct NormRow {
    double t = 0.0;
    std::vector<double> hs; ///< H^0 .. H^{s0+1}
    double ut_l2 = 0.0;
    double triple = 0.0;
    double quad = 0.0;
    double full_weighted = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void multi_indices_rec(int d, int depth, int left, std::vector<int>& cur,
                              std::vector<std::vector<int>>& out) {
    if (depth == d) {
        out.push_back(cur);
        return;
    }
    for (int v = 0; v <= left; ++v) {
        cur[depth] = v;
        multi_indices_rec(d, depth + 1, left - v, cur, out);
    }
}

/// All alpha with |alpha| <= max_order, lexicographic.
inline std::vector<std::vector<int>> multi_indices(int d, int max_order) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(d);
    multi_indices_rec(d, 0, max_order, cur, out);
    return out;
}

/// Weights A0(eps u(x)) sampled at every node, diagonal or full.
struct A0Nodes {
    bool identity = true;
    bool diagonal = false;
    std::vector<double> diag; ///< [node * n + c]
    std::vector<double> full; ///< [node * n * n + ...]
};

inline A0Nodes a0_at_nodes(const Solver& solver, const SpectralState& u) {
    const SystemSpec& sys = solver.system();
    A0Nodes w;
    if (!sys.has_a0()) return w;
    w.identity = false;
    w.diagonal = static_cast<bool>(sys.a0_diag);
    const int n = sys.components;
    const long m = u.grid.points();
    const auto uphys = to_grid_values(solver.fourier(), u);
    std::vector<double> vnode(n);
    if (w.diagonal) {
        w.diag.resize(static_cast<size_t>(m) * n);
        for (long i = 0; i < m; ++i) {
            for (int c = 0; c < n; ++c) vnode[c] = sys.eps * uphys[c][i].real();
            sys.a0_diag(vnode.data(), w.diag.data() + static_cast<size_t>(i) * n);
        }
    } else {
        w.full.resize(static_cast<size_t>(m) * n * n);
        for (long i = 0; i < m; ++i) {
            for (int c = 0; c < n; ++c) vnode[c] = sys.eps * uphys[c][i].real();
            sys.a0_full(vnode.data(), w.full.data() + static_cast<size_t>(i) * n * n);
        }
    }
    return w;
}

/// |v|_{0,A0}^2 = (1/N^d) sum_x v(x)^T A0 v(x) for a real field.
inline double a0_sq(const Solver& solver, const A0Nodes& w, const SpectralState& v) {
    const int n = v.components;
    const long m = v.grid.points();
    const auto vphys = to_grid_values(solver.fourier(), v);
    double acc = 0.0;
    for (long i = 0; i < m; ++i) {
        if (w.identity) {
            for (int c = 0; c < n; ++c) acc += vphys[c][i].real() * vphys[c][i].real();
        } else if (w.diagonal) {
            for (int c = 0; c < n; ++c)
                acc += w.diag[static_cast<size_t>(i) * n + c] * vphys[c][i].real() * vphys[c][i].real();
        } else {
            const double* a0 = w.full.data() + static_cast<size_t>(i) * n * n;
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c)
                    acc += vphys[r][i].real() * a0[r * n + c] * vphys[c][i].real();
        }
    }
    return acc / static_cast<double>(m);
}

inline SpectralState multi_derivative(const SpectralState& u, const std::vector<int>& alpha) {
    SpectralState d = u;
    const long m = u.grid.points();
    for (long f = 0; f < m; ++f) {
        const auto k = u.grid.wavevector(f);
        Complex factor{1.0, 0.0};
        for (size_t j = 0; j < alpha.size(); ++j)
            for (int r = 0; r < alpha[j]; ++r) factor *= im * static_cast<double>(k[j]);
        for (int c = 0; c < u.components; ++c) d.at(c, f) = factor * u.at(c, f);
    }
    return d;
}

/// |v|_{ell,A0}^2 = sum_{|alpha| <= ell} |D^alpha v|_{0,A0}^2.
inline double a0_sobolev_sq(const Solver& solver, const A0Nodes& w, const SpectralState& v, int ell) {
    double acc = 0.0;
    for (const auto& alpha : multi_indices(v.grid.dim, ell))
        acc += a0_sq(solver, w, multi_derivative(v, alpha));
    return acc;
}

/// Order-2 finite-difference samples of the m-th derivative of the series f.
inline SpectralState fd_derivative(const std::vector<SpectralState>& f, int i, int m, double h) {
    const int last = static_cast<int>(f.size()) - 1;
    const auto lin = [&](std::initializer_list<std::pair<int, double>> terms, double scale) {
        SpectralState out(f[0].grid, f[0].components, f[i].time);
        for (const auto& [idx, c] : terms) out.axpy(c, f[idx]);
        out *= scale;
        return out;
    };
    switch (m) {
    case 1:
        if (i == 0) return lin({{0, -3.0}, {1, 4.0}, {2, -1.0}}, 1.0 / (2.0 * h));
        if (i == last) return lin({{last, 3.0}, {last - 1, -4.0}, {last - 2, 1.0}}, 1.0 / (2.0 * h));
        return lin({{i + 1, 1.0}, {i - 1, -1.0}}, 1.0 / (2.0 * h));
    case 2:
        if (i == 0) return lin({{0, 2.0}, {1, -5.0}, {2, 4.0}, {3, -1.0}}, 1.0 / (h * h));
        if (i == last)
            return lin({{last, 2.0}, {last - 1, -5.0}, {last - 2, 4.0}, {last - 3, -1.0}}, 1.0 / (h * h));
        return lin({{i + 1, 1.0}, {i, -2.0}, {i - 1, 1.0}}, 1.0 / (h * h));
    case 3: {
        const double h3 = h * h * h;
        if (i <= 1) return lin({{0, -2.5}, {1, 9.0}, {2, -12.0}, {3, 7.0}, {4, -1.5}}, 1.0 / h3);
        if (i >= last - 1)
            return lin({{last, 2.5}, {last - 1, -9.0}, {last - 2, 12.0}, {last - 3, -7.0}, {last - 4, 1.5}},
                       1.0 / h3);
        return lin({{i + 2, 0.5}, {i + 1, -1.0}, {i - 1, 1.0}, {i - 2, -0.5}}, 1.0 / h3);
    }
    default:
        throw InsufficientSamplingError("finite differences implemented up to the third derivative");
    }
}

} // namespace detail

/// Per-sample norm report over a trajectory with uniform output spacing.
inline std::vector<NormRow> norm_report(const Solver& solver, const std::vector<SpectralState>& traj,
                                        int s0, WeightScheme scheme = WeightScheme::Simplified) {
    const SystemSpec& sys = solver.system();
    const int s_top = s0 + 1;
    if (traj.size() < 2) throw InsufficientSamplingError("norm report needs at least two samples");
    const double h = traj[1].time - traj[0].time;
    for (size_t i = 1; i < traj.size(); ++i)
        if (std::abs(traj[i].time - traj[i - 1].time - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw InsufficientSamplingError("norm report needs uniform output spacing");
    if (s_top >= 2) {
        if (h > sys.delta / 4.0 + 1e-15)
            throw InsufficientSamplingError("output spacing must be <= delta/4 for time derivatives");
        const size_t need = s_top >= 4 ? 5 : (s_top >= 3 ? 4 : 3);
        if (traj.size() < need)
            throw InsufficientSamplingError("trajectory too short for the requested derivatives");
    }

    std::vector<SpectralState> ut;
    ut.reserve(traj.size());
    for (const auto& u : traj) ut.push_back(solver.rhs_eval(u, u.time));

    // exact derivatives at t = 0 when the system's recursion applies
    std::vector<SpectralState> exact0;
    try {
        exact0 = solver.time_derivs_at_zero(traj.front(), s_top);
    } catch (const UnsupportedSystemError&) {
    }

    std::vector<NormRow> rows;
    rows.reserve(traj.size());
    for (size_t i = 0; i < traj.size(); ++i) {
        const SpectralState& u = traj[i];
        NormRow row;
        row.t = u.time;
        for (int l = 0; l <= s_top; ++l) row.hs.push_back(sobolev_norm(u, l));
        row.ut_l2 = l2_norm(ut[i]);

        const detail::A0Nodes w = detail::a0_at_nodes(solver, u);
        std::vector<SpectralState> tderiv{u, ut[i]};
        for (int k = 2; k <= s_top; ++k) {
            if (i == 0 && !exact0.empty())
                tderiv.push_back(exact0[k]);
            else
                tderiv.push_back(detail::fd_derivative(ut, static_cast<int>(i), k - 1, h));
        }
        double triple2 = 0.0;
        for (int k = 0; k <= s_top; ++k)
            triple2 += std::pow(sys.eps, 2 * k) * detail::a0_sobolev_sq(solver, w, tderiv[k], s_top - k);
        row.triple = std::sqrt(triple2);
        row.quad = std::sqrt(triple2 + detail::a0_sq(solver, w, ut[i]));

        if (scheme == WeightScheme::Full) {
            double full = sobolev_norm(u, s_top);
            for (int k = 1; k <= s_top; ++k)
                for (const auto& alpha : detail::multi_indices(u.grid.dim, s_top - k)) {
                    int ord = 0;
                    for (int a : alpha) ord += a;
                    const double weight = std::pow(sys.delta, k + ord - 1) / std::pow(sys.eps, ord);
                    full += weight * l2_norm(detail::multi_derivative(tderiv[k], alpha));
                }
            row.full_weighted = full;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace tsl
