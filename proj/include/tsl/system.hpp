#pragma once

// Runtime description of the evolution system
//   A0(eps u) u_t + sum_j A_j(u) u_xj + (1/delta) L u + (1/eps) M u = G + H u
// plus the builtin benchmark systems used by the experiments.

#include <cmath>
#include <functional>
#include <vector>

#include "tsl/cmatrix.hpp"
#include "tsl/symbols.hpp"

namespace tsl {

struct SystemSpec {
    int components = 1;
    int dim = 1;
    double eps = 0.1;
    double delta = 0.01;

    OperatorSymbol lsym; ///< 1/delta operator
    OperatorSymbol msym; ///< 1/eps operator

    /// A0(v) with v = eps u. Empty: identity. Diagonal form preferred; the
    /// full form falls back to a per-node eigensolve.
    std::function<void(const double* v, double* diag)> a0_diag;
    std::function<void(const double* v, double* mat)> a0_full;
    /// directional derivative dA0(v)[w] of the diagonal form (exact u_tt)
    std::function<void(const double* v, const double* w, double* diag)> da0_diag;

    /// advection coefficients A_j(u), symmetric; empty list: no advection
    std::vector<std::function<void(const double* u, double* mat)>> a_adv;
    /// directional derivatives dA_j(u)[w] (exact u_tt), same indexing
    std::vector<std::function<void(const double* u, const double* w, double* mat)>> da_adv;

    /// forcing F = G(t,x) + H(t,x,u) u; empty members are zero
    std::function<void(double t, const double* x, double* g)> forcing_g;
    std::function<void(double t, const double* x, const double* u, double* h)> forcing_h;

    double c0 = 0.5; ///< A0 >= c0 I on the validity ball
    double b0 = 1.0; ///< validity radius for |eps u|

    bool linear_constant = false;   ///< constant coefficients: exact per-mode propagator
    bool a0_time_invariant = false; ///< A0(eps u(t)) frozen along the flow

    bool has_a0() const { return static_cast<bool>(a0_diag) || static_cast<bool>(a0_full); }
    bool nonlinear() const { return !linear_constant && (has_a0() || !a_adv.empty() || static_cast<bool>(forcing_h)); }
};

// --- builtin systems -------------------------------------------------------

/// Two-component 2-d benchmark: (1/eps^2) d/dx on the first component and
/// (1/eps) off-diagonal d/dy coupling; constant coefficients.
inline SystemSpec make_wave2d(double eps, double delta) {
    SystemSpec s;
    s.components = 2;
    s.dim = 2;
    s.eps = eps;
    s.delta = delta;
    s.lsym = OperatorSymbol(CMatrix::zero(2, 2),
                            {CMatrix{{1.0, 0.0}, {0.0, 0.0}}, CMatrix::zero(2, 2)});
    s.msym = OperatorSymbol(CMatrix::zero(2, 2),
                            {CMatrix::zero(2, 2), CMatrix{{0.0, 1.0}, {1.0, 0.0}}});
    s.linear_constant = true;
    return s;
}

/// Five-component constant-multiplier system with unit advection,
///   u_t + u_x + (1/delta) L u + (1/eps) M u = 0,
/// L a rotation in the first two components, M the (a b; c d) coupling with
/// an i m entry on the third.
inline SystemSpec make_multiplier5(double a, double b, double c, double d, double m,
                                   double eps, double delta, bool advection = true) {
    SystemSpec s;
    s.components = 5;
    s.dim = 1;
    s.eps = eps;
    s.delta = delta;
    s.lsym = OperatorSymbol(CMatrix{{0, 1, 0, 0, 0},
                                    {-1, 0, 0, 0, 0},
                                    {0, 0, 0, 0, 0},
                                    {0, 0, 0, 0, 0},
                                    {0, 0, 0, 0, 0}},
                            {CMatrix::zero(5, 5)});
    const CMatrix mm{{0, 0, 0, a, b},
                     {0, 0, 0, c, d},
                     {0, 0, im * m, 0, 0},
                     {-a, -c, 0, 0, 0},
                     {-b, -d, 0, 0, 0}};
    s.msym = OperatorSymbol(5, 1, [mm](const Wavevector&) { return mm; });
    if (advection)
        s.a_adv.push_back([](const double*, double* mat) {
            for (int i = 0; i < 25; ++i) mat[i] = 0.0;
            for (int i = 0; i < 5; ++i) mat[i * 5 + i] = 1.0;
        });
    s.linear_constant = true;
    return s;
}

/// Stiff-oscillator system a(eps w) u_t = v/delta, a(eps w) v_t = -u/delta,
/// w_t = 0, with a(v) = 1 + v. A0 is frozen along the flow since w is.
inline SystemSpec make_oscillator(double eps, double delta) {
    SystemSpec s;
    s.components = 3;
    s.dim = 1;
    s.eps = eps;
    s.delta = delta;
    s.lsym = OperatorSymbol(CMatrix{{0, -1, 0}, {1, 0, 0}, {0, 0, 0}}, {CMatrix::zero(3, 3)});
    s.msym = OperatorSymbol::zero(3, 1);
    s.a0_diag = [](const double* v, double* diag) {
        diag[0] = 1.0 + v[2];
        diag[1] = 1.0 + v[2];
        diag[2] = 1.0;
    };
    s.da0_diag = [](const double*, const double* w, double* diag) {
        diag[0] = w[2];
        diag[1] = w[2];
        diag[2] = 0.0;
    };
    s.c0 = 0.5;
    s.b0 = 0.5;
    s.a0_time_invariant = true;
    return s;
}

/// Quasilinear 1-d toy: A0 = (1 + eps u3) I, advection u3 I, zero-order
/// rotation in (u1,u2) at rate 1/delta, and a (1/eps) d/dx coupling between
/// u1 and u3. Well-prepared data live in the u3 component with an O(delta/eps)
/// correction on u2 (the chain then terminates exactly).
inline SystemSpec make_quasilinear1d(double eps, double delta) {
    SystemSpec s;
    s.components = 3;
    s.dim = 1;
    s.eps = eps;
    s.delta = delta;
    s.lsym = OperatorSymbol(CMatrix{{0, -1, 0}, {1, 0, 0}, {0, 0, 0}}, {CMatrix::zero(3, 3)});
    s.msym = OperatorSymbol(CMatrix::zero(3, 3),
                            {CMatrix{{0, 0, 1}, {0, 0, 0}, {1, 0, 0}}});
    s.a0_diag = [](const double* v, double* diag) {
        diag[0] = diag[1] = diag[2] = 1.0 + v[2];
    };
    s.da0_diag = [](const double*, const double* w, double* diag) {
        diag[0] = diag[1] = diag[2] = w[2];
    };
    s.a_adv.push_back([](const double* u, double* mat) {
        for (int i = 0; i < 9; ++i) mat[i] = 0.0;
        mat[0] = mat[4] = mat[8] = u[2];
    });
    s.da_adv.push_back([](const double*, const double* w, double* mat) {
        for (int i = 0; i < 9; ++i) mat[i] = 0.0;
        mat[0] = mat[4] = mat[8] = w[2];
    });
    s.c0 = 0.5;
    s.b0 = 0.5;
    return s;
}

} // namespace tsl
