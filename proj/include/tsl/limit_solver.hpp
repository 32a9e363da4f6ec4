#pragma once

// Integration of the limit system
//   P [ A0(0) U_t + sum_j A_j(U) U_xj + T_lim U - F ] = 0,   (I - P) U = 0,
// where P and T_lim are the mode-wise limit projection and limit multiplier
// of the scaling regime. Constant-coefficient systems evolve exactly per
// mode; quasilinear ones use RK4 with the projection applied to every stage
// derivative. Also provides the closed-form mode oracles of the 2-d wave
// benchmark.

#include <cmath>
#include <vector>

#include "tsl/expm.hpp"
#include "tsl/solver.hpp"
#include "tsl/symbols.hpp"

namespace tsl {

class LimitSolver {
public:
    /// base carries the eps = 0 coefficients (A0 at 0, A_j, F) and the
    /// symbols whose reduction defines the limit projection.
    LimitSolver(SystemSpec base, ScalingRegime regime, GridSpec grid, double tau_rank = 1e-10)
        : sys_(std::move(base)), regime_(regime), grid_(grid), fourier_(grid) {
        if (sys_.dim != grid_.dim) throw DimensionMismatchError("system/grid dimension mismatch");
        const long m = grid_.points();
        modes_.reserve(m);
        for (long f = 0; f < m; ++f)
            modes_.push_back(limit_projector(sys_.lsym, sys_.msym, regime_, grid_.wavevector(f), tau_rank));
    }

    const GridSpec& grid() const { return grid_; }
    const Fourier& fourier() const { return fourier_; }
    const LimitMode& mode(long f) const { return modes_[f]; }

    /// Largest |T_lim_hat| over the active grid; the multiplier may be
    /// unbounded as an operator, so refining the grid can change this.
    double tlim_max() const {
        double m = 0.0;
        for (const auto& lm : modes_) m = std::max(m, lm.tlim.max_abs());
        return m;
    }

    /// Mode-wise application of the limit projection.
    SpectralState project(const SpectralState& u) const {
        SpectralState out = u;
        const int n = sys_.components;
        std::vector<Complex> v(n);
        for (long f = 0; f < grid_.points(); ++f) {
            for (int c = 0; c < n; ++c) v[c] = u.at(c, f);
            const auto pv = modes_[f].projection.apply(v);
            for (int c = 0; c < n; ++c) out.at(c, f) = pv[c];
        }
        return out;
    }

    /// Relative size of the constraint-violating part of the last initial
    /// datum handed to solve(); data off range(P) are projected, not rejected.
    double initial_projection_defect() const { return init_defect_; }

    std::vector<SpectralState> solve(const SpectralState& u00, double t_end,
                                     const StepPolicy& policy = {}) const {
        SpectralState u0 = project(u00);
        const double norm = l2_norm(u00);
        init_defect_ = norm > 0.0 ? l2_distance(u0, u00) / norm : 0.0;
        u0.time = 0.0;

        std::vector<double> times = policy.output_times;
        if (times.empty()) {
            times.resize(policy.n_outputs);
            for (int i = 0; i < policy.n_outputs; ++i)
                times[i] = t_end * static_cast<double>(i + 1) / policy.n_outputs;
        }

        std::vector<SpectralState> traj;
        traj.reserve(times.size() + 1);
        traj.push_back(u0);

        const bool linear = sys_.linear_constant ||
                            (sys_.a_adv.empty() && !sys_.forcing_g && !sys_.forcing_h);
        if (linear) {
            build_propagators();
            for (double t : times) {
                traj.push_back(propagate_exact(u0, t));
                check_constraint(traj.back());
            }
            return traj;
        }

        SpectralState u = u0;
        double t = 0.0;
        for (double t_next : times) {
            const double interval = t_next - t;
            if (interval <= 0.0) throw ConfigError("output times must be strictly increasing");
            const double dt_target = step_limit(u, policy);
            if (dt_target < 1e-12) throw StepCollapseError("time step collapsed below 1e-12");
            const long n_sub = static_cast<long>(std::ceil(interval / dt_target - 1e-9));
            const double h = interval / static_cast<double>(std::max<long>(n_sub, 1));
            for (long i = 0; i < std::max<long>(n_sub, 1); ++i) rk4_step(u, t + i * h, h);
            u.time = t_next;
            t = t_next;
            traj.push_back(u);
            check_constraint(u);
        }
        return traj;
    }

    /// Projected time derivative: U_t = -pinv(P A0 P) P [N(U)] with
    /// N(U) = sum_j A_j(U) U_xj + T_lim U - F.
    SpectralState rhs_eval(const SpectralState& u, double t) const {
        build_propagators();
        const int n = sys_.components;
        const long m = grid_.points();
        SpectralState nonstiff(grid_, n, t);

        // T_lim U per mode
        std::vector<Complex> v(n);
        for (long f = 0; f < m; ++f) {
            for (int c = 0; c < n; ++c) v[c] = u.at(c, f);
            const auto tv = modes_[f].tlim.apply(v);
            for (int c = 0; c < n; ++c) nonstiff.at(c, f) = tv[c];
        }

        if (!sys_.a_adv.empty() || sys_.forcing_g || sys_.forcing_h) {
            const auto uphys = to_grid_values(fourier_, u);
            std::vector<std::vector<Complex>> acc(n, std::vector<Complex>(m, Complex{}));
            std::vector<double> unode(n), gnode(n), amat(static_cast<size_t>(n) * n),
                hmat(static_cast<size_t>(n) * n);
            std::vector<std::vector<Complex>> dphys(n);
            for (size_t j = 0; j < sys_.a_adv.size(); ++j) {
                const SpectralState du = derivative(u, static_cast<int>(j));
                for (int c = 0; c < n; ++c) {
                    dphys[c].resize(m);
                    fourier_.to_grid(du.comp_data(c), dphys[c].data());
                }
                for (long i = 0; i < m; ++i) {
                    for (int c = 0; c < n; ++c) unode[c] = uphys[c][i].real();
                    sys_.a_adv[j](unode.data(), amat.data());
                    for (int r = 0; r < n; ++r) {
                        Complex s{};
                        for (int c = 0; c < n; ++c) s += amat[r * n + c] * dphys[c][i];
                        acc[r][i] += s;
                    }
                }
            }
            for (long i = 0; i < m && (sys_.forcing_g || sys_.forcing_h); ++i) {
                const auto x = node_coords(grid_, i);
                for (int c = 0; c < n; ++c) unode[c] = uphys[c][i].real();
                if (sys_.forcing_g) {
                    sys_.forcing_g(t, x.data(), gnode.data());
                    for (int c = 0; c < n; ++c) acc[c][i] -= gnode[c];
                }
                if (sys_.forcing_h) {
                    sys_.forcing_h(t, x.data(), unode.data(), hmat.data());
                    for (int r = 0; r < n; ++r) {
                        double s = 0.0;
                        for (int c = 0; c < n; ++c) s += hmat[r * n + c] * unode[c];
                        acc[r][i] -= s;
                    }
                }
            }
            std::vector<Complex> coefs(m);
            for (int c = 0; c < n; ++c) {
                fourier_.to_coef(acc[c].data(), coefs.data());
                for (long f = 0; f < m; ++f) nonstiff.at(c, f) += coefs[f];
            }
        }

        SpectralState rhs(grid_, n, t);
        for (long f = 0; f < m; ++f) {
            for (int c = 0; c < n; ++c) v[c] = nonstiff.at(c, f);
            const auto y = inv_a0p_[f].apply(modes_[f].projection.apply(v));
            for (int c = 0; c < n; ++c) rhs.at(c, f) = -y[c];
        }
        if (!sys_.a_adv.empty() || sys_.forcing_h) dealias(rhs);
        return rhs;
    }

private:
    void check_constraint(const SpectralState& u) const {
        const double norm = l2_norm(u);
        if (norm == 0.0) return;
        if (l2_distance(u, project(u)) > 1e-8 * norm)
            throw ConstraintDriftError("limit solution drifted off range(P)");
    }

    double step_limit(const SpectralState& u, const StepPolicy& policy) const {
        if (policy.dt_override > 0.0) return policy.dt_override;
        // no stiff term remains; restrict by CFL and by the limit multiplier
        double h = 0.1 / std::max(tlim_max(), 1.0);
        if (!sys_.a_adv.empty()) {
            const int n = sys_.components;
            const auto uphys = to_grid_values(fourier_, u);
            std::vector<double> unode(n), amat(static_cast<size_t>(n) * n);
            double speed = 0.0;
            for (long i = 0; i < grid_.points(); ++i) {
                for (int c = 0; c < n; ++c) unode[c] = uphys[c][i].real();
                for (const auto& adv : sys_.a_adv) {
                    adv(unode.data(), amat.data());
                    for (int r = 0; r < n; ++r) {
                        double s = 0.0;
                        for (int c = 0; c < n; ++c) s += std::abs(amat[r * n + c]);
                        speed = std::max(speed, s);
                    }
                }
            }
            if (speed > 0.0) h = std::min(h, policy.c_cfl * grid_.dx() / speed);
        }
        return h;
    }

    void rk4_step(SpectralState& u, double t, double h) const {
        const SpectralState k1 = rhs_eval(u, t);
        SpectralState s = u;
        s.axpy(0.5 * h, k1);
        const SpectralState k2 = rhs_eval(s, t + 0.5 * h);
        s = u;
        s.axpy(0.5 * h, k2);
        const SpectralState k3 = rhs_eval(s, t + 0.5 * h);
        s = u;
        s.axpy(h, k3);
        const SpectralState k4 = rhs_eval(s, t + h);
        u.axpy(h / 6.0, k1);
        u.axpy(h / 3.0, k2);
        u.axpy(h / 3.0, k3);
        u.axpy(h / 6.0, k4);
    }

    CMatrix constant_a0() const {
        const int n = sys_.components;
        if (!sys_.has_a0()) return CMatrix::identity(n);
        std::vector<double> zero(n, 0.0);
        CMatrix a0(n, n);
        if (sys_.a0_diag) {
            std::vector<double> diag(n);
            sys_.a0_diag(zero.data(), diag.data());
            for (int c = 0; c < n; ++c) a0(c, c) = diag[c];
        } else {
            std::vector<double> mat(static_cast<size_t>(n) * n);
            sys_.a0_full(zero.data(), mat.data());
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) a0(r, c) = mat[r * n + c];
        }
        return a0;
    }

    void build_propagators() const {
        if (!inv_a0p_.empty()) return;
        const int n = sys_.components;
        const long m = grid_.points();
        const CMatrix a0 = constant_a0();
        const bool a0_identity = (a0 - CMatrix::identity(n)).max_abs() <= 1e-14;

        inv_a0p_.reserve(m);
        for (long f = 0; f < m; ++f) {
            const CMatrix& p = modes_[f].projection;
            inv_a0p_.push_back(a0_identity ? p : pseudo_inverse(p * a0 * p, 1e-12));
        }

        if (!(sys_.linear_constant || (sys_.a_adv.empty() && !sys_.forcing_g && !sys_.forcing_h)))
            return;

        std::vector<double> zero(n, 0.0);
        std::vector<CMatrix> aconst;
        for (const auto& adv : sys_.a_adv) {
            std::vector<double> mat(static_cast<size_t>(n) * n);
            adv(zero.data(), mat.data());
            CMatrix am(n, n);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) am(r, c) = mat[r * n + c];
            aconst.push_back(std::move(am));
        }

        gens_.reserve(m);
        herm_.reserve(m);
        for (long f = 0; f < m; ++f) {
            const auto k = grid_.wavevector(f);
            const CMatrix& p = modes_[f].projection;
            CMatrix s = modes_[f].tlim;
            for (size_t j = 0; j < aconst.size(); ++j)
                s += (im * static_cast<double>(k[j])) * aconst[j];
            const CMatrix gen = -(inv_a0p_[f] * (p * s * p));
            if (a0_identity) {
                // skew generator: exact eigendecomposition route
                herm_.push_back(herm_eig(im * gen));
                gens_.push_back(gen);
            } else {
                herm_.push_back(EigResult{});
                gens_.push_back(gen);
            }
        }
        a0_identity_ = a0_identity;
    }

    SpectralState propagate_exact(const SpectralState& u0, double t) const {
        const int n = sys_.components;
        SpectralState out(grid_, n, t);
        std::vector<Complex> v(n), y(n);
        for (long f = 0; f < grid_.points(); ++f) {
            for (int c = 0; c < n; ++c) v[c] = u0.at(c, f);
            if (a0_identity_) {
                const EigResult& eig = herm_[f];
                y = eig.vectors.adjoint().apply(v);
                for (int c = 0; c < n; ++c) y[c] *= std::exp(Complex{0.0, -eig.values[c] * t});
                y = eig.vectors.apply(y);
            } else {
                y = matrix_exp(t * gens_[f]).apply(v);
            }
            for (int c = 0; c < n; ++c) out.at(c, f) = y[c];
        }
        return out;
    }

    SystemSpec sys_;
    ScalingRegime regime_;
    GridSpec grid_;
    Fourier fourier_;
    std::vector<LimitMode> modes_;
    mutable std::vector<CMatrix> inv_a0p_; ///< pinv(P A0 P) per mode (P itself when A0 = I)
    mutable std::vector<CMatrix> gens_;
    mutable std::vector<EigResult> herm_;
    mutable bool a0_identity_ = true;
    mutable double init_defect_ = 0.0;
};

/// Limit solution of the 2-d wave benchmark in the V component:
/// V_hat(t,k,l) = i k e^{i l^2 t / k} f_hat. The limit is zero when k = 0.
inline Complex wave2d_limit_mode(Complex f_hat, double t, int k, int l) {
    if (k == 0) throw ZeroWavenumberError("limit mode formula needs k != 0");
    const double kk = static_cast<double>(k);
    const double ll = static_cast<double>(l);
    return im * kk * std::exp(im * (ll * ll / kk) * t) * f_hat;
}

/// Exact two-branch mode solution of the eps-dependent benchmark for initial
/// data (U,V)(0) = (0, i k f_hat): with R = sqrt(k^2 + 4 eps^2 l^2),
///   V(t) = i k f_hat [ (k+R) e^{i(-k+R)t/(2 eps^2)}
///                    - (k-R) e^{i(-k-R)t/(2 eps^2)} ] / (2R).
/// Tends to wave2d_limit_mode as eps -> 0.
inline Complex wave2d_dispersion_mode(Complex f_hat, double t, int k, int l, double eps) {
    if (k == 0) throw ZeroWavenumberError("dispersion formula needs k != 0");
    const double kk = static_cast<double>(k);
    const double ll = static_cast<double>(l);
    const double r = std::sqrt(kk * kk + 4.0 * eps * eps * ll * ll);
    const double e2 = 2.0 * eps * eps;
    const Complex slow = std::exp(im * ((-kk + r) / e2) * t) * (kk + r);
    const Complex fast = std::exp(im * ((-kk - r) / e2) * t) * (kk - r);
    return im * kk * f_hat * (slow - fast) / (2.0 * r);
}

} // namespace tsl
