#pragma once

// Spectral time integration of the three-scale system. Constant-coefficient
// systems evolve by exact per-mode exponentials (eigendecomposition of the
// A0-symmetrized skew generator); quasilinear systems use pseudo-spectral
// RK4 with the stiff step restriction dt <= c_stiff * delta.

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "tsl/expm.hpp"
#include "tsl/grid.hpp"
#include "tsl/linalg.hpp"
#include "tsl/system.hpp"

namespace tsl {

struct StepPolicy {
    int n_outputs = 20;               ///< uniform output times when output_times is empty
    std::vector<double> output_times; ///< strictly increasing, within (0, t_end]
    double c_stiff = 0.1;             ///< dt <= c_stiff * delta
    double c_cfl = 0.5;               ///< dt <= c_cfl * dx / max wave speed
    double dt_override = 0.0;         ///< fixed step target when > 0
};

class Solver {
public:
    Solver(SystemSpec sys, GridSpec grid)
        : sys_(std::move(sys)), grid_(grid), fourier_(grid) {
        if (sys_.dim != grid_.dim) throw DimensionMismatchError("system/grid dimension mismatch");
        const long m = grid_.points();
        ltab_.reserve(m);
        mtab_.reserve(m);
        for (long f = 0; f < m; ++f) {
            const auto k = grid_.wavevector(f);
            ltab_.push_back(sys_.lsym.at(k));
            mtab_.push_back(sys_.msym.at(k));
        }
    }

    const SystemSpec& system() const { return sys_; }
    const GridSpec& grid() const { return grid_; }
    const Fourier& fourier() const { return fourier_; }

    /// u_t = A0(eps u)^{-1} [F - sum A_j(u) u_xj - (1/delta) L u - (1/eps) M u]
    SpectralState rhs_eval(const SpectralState& u, double t) const {
        if (!u.finite()) throw Error("rhs_eval: state has non-finite coefficients");
        const int n = sys_.components;
        const long m = grid_.points();

        SpectralState rhs(grid_, n, t);
        std::vector<Complex> v(n), w(n);
        for (long f = 0; f < m; ++f) {
            for (int c = 0; c < n; ++c) v[c] = u.at(c, f);
            const auto lu = ltab_[f].apply(v);
            const auto mu = mtab_[f].apply(v);
            for (int c = 0; c < n; ++c) rhs.at(c, f) = -lu[c] / sys_.delta - mu[c] / sys_.eps;
        }

        const bool need_physical = sys_.has_a0() || !sys_.a_adv.empty() ||
                                   static_cast<bool>(sys_.forcing_g) || static_cast<bool>(sys_.forcing_h);
        if (!need_physical) return rhs;

        const auto uphys = to_grid_values(fourier_, u);
        check_amplitude(uphys);

        // physical-space accumulation: F - sum A_j(u) u_xj
        std::vector<std::vector<Complex>> acc;
        const bool have_acc = !sys_.a_adv.empty() || sys_.forcing_g || sys_.forcing_h;
        if (have_acc) {
            acc.assign(n, std::vector<Complex>(m, Complex{}));
            std::vector<double> unode(n), gnode(n), hmat(static_cast<size_t>(n) * n), amat(static_cast<size_t>(n) * n);
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
                        acc[r][i] -= s;
                    }
                }
            }
            if (sys_.forcing_g || sys_.forcing_h) {
                for (long i = 0; i < m; ++i) {
                    const auto x = node_coords(grid_, i);
                    for (int c = 0; c < n; ++c) unode[c] = uphys[c][i].real();
                    if (sys_.forcing_g) {
                        sys_.forcing_g(t, x.data(), gnode.data());
                        for (int c = 0; c < n; ++c) acc[c][i] += gnode[c];
                    }
                    if (sys_.forcing_h) {
                        sys_.forcing_h(t, x.data(), unode.data(), hmat.data());
                        for (int r = 0; r < n; ++r) {
                            double s = 0.0;
                            for (int c = 0; c < n; ++c) s += hmat[r * n + c] * unode[c];
                            acc[r][i] += s;
                        }
                    }
                }
            }
            std::vector<Complex> coefs(m);
            for (int c = 0; c < n; ++c) {
                fourier_.to_coef(acc[c].data(), coefs.data());
                for (long f = 0; f < m; ++f) rhs.at(c, f) += coefs[f];
            }
        }

        if (sys_.has_a0()) apply_a0_inverse(rhs, uphys);
        if (sys_.nonlinear()) dealias(rhs);
        rhs.time = t;
        return rhs;
    }

    /// Trajectory at t = 0 and at the requested output times.
    std::vector<SpectralState> simulate(const SpectralState& u0, double t_end,
                                        const StepPolicy& policy = {}) const {
        std::vector<double> times = policy.output_times;
        if (times.empty()) {
            times.resize(policy.n_outputs);
            for (int i = 0; i < policy.n_outputs; ++i)
                times[i] = t_end * static_cast<double>(i + 1) / policy.n_outputs;
        }
        std::vector<SpectralState> traj;
        traj.reserve(times.size() + 1);
        traj.push_back(u0);
        traj.front().time = 0.0;

        if (sys_.linear_constant) {
            build_propagators();
            for (double t : times) traj.push_back(propagate_exact(u0, t));
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
        }
        return traj;
    }

    /// Time derivatives at t = 0: returns [u0, du/dt, ..., d^k u/dt^k].
    /// Exact for constant-coefficient systems; for quasilinear systems the
    /// second derivative uses the differentiated PDE (keeping u_t in place),
    /// and higher orders need the frozen-A0 structure.
    std::vector<SpectralState> time_derivs_at_zero(const SpectralState& u0, int k_max) const {
        std::vector<SpectralState> derivs{u0};
        if (k_max < 1) return derivs;
        derivs.push_back(rhs_eval(u0, 0.0));

        if (sys_.linear_constant) {
            build_propagators();
            for (int k = 2; k <= k_max; ++k) {
                const SpectralState& prev = derivs.back();
                SpectralState next(grid_, sys_.components, 0.0);
                std::vector<Complex> v(sys_.components);
                for (long f = 0; f < grid_.points(); ++f) {
                    for (int c = 0; c < sys_.components; ++c) v[c] = prev.at(c, f);
                    const auto gv = props_[f].generator.apply(v);
                    for (int c = 0; c < sys_.components; ++c) next.at(c, f) = gv[c];
                }
                derivs.push_back(std::move(next));
            }
            return derivs;
        }

        if (k_max >= 2) derivs.push_back(second_deriv_quasilinear(u0, derivs[1]));
        for (int k = 3; k <= k_max; ++k) {
            if (!sys_.a0_time_invariant || !sys_.a_adv.empty() || sys_.forcing_g || sys_.forcing_h)
                throw UnsupportedSystemError(
                    "time derivatives of order >= 3 need a frozen A0 and no advection/forcing");
            derivs.push_back(stiff_apply_frozen(u0, derivs.back()));
        }
        return derivs;
    }

    /// max over nodes of the advection row-sum norm (CFL speed)
    double max_wave_speed(const SpectralState& u) const {
        if (sys_.a_adv.empty()) return 0.0;
        const auto uphys = to_grid_values(fourier_, u);
        const int n = sys_.components;
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
        return speed;
    }

private:
    struct ModeProp {
        CMatrix generator;         ///< G(k) = -A0^{-1} (i k.A + L/delta + M/eps)
        CMatrix cols;              ///< W^{-1} V
        CMatrix rows;              ///< V* W
        std::vector<double> freq;  ///< G = cols diag(-i freq) rows
        std::vector<Complex> force; ///< A0^{-1} G_hat(k), static forcing
    };

    void check_amplitude(const std::vector<std::vector<Complex>>& uphys) const {
        if (!sys_.has_a0()) return;
        const int n = sys_.components;
        for (long i = 0; i < grid_.points(); ++i) {
            double norm2 = 0.0;
            for (int c = 0; c < n; ++c) norm2 += uphys[c][i].real() * uphys[c][i].real();
            if (sys_.eps * std::sqrt(norm2) > sys_.b0)
                throw AmplitudeEscapeError("pointwise |eps u| exceeded the validity radius b0");
        }
    }

    void apply_a0_inverse(SpectralState& rhs, const std::vector<std::vector<Complex>>& uphys) const {
        const int n = sys_.components;
        const long m = grid_.points();
        std::vector<std::vector<Complex>> rphys(n, std::vector<Complex>(m));
        for (int c = 0; c < n; ++c) fourier_.to_grid(rhs.comp_data(c), rphys[c].data());
        std::vector<double> vnode(n), diag(n), mat(static_cast<size_t>(n) * n);
        for (long i = 0; i < m; ++i) {
            for (int c = 0; c < n; ++c) vnode[c] = sys_.eps * uphys[c][i].real();
            if (sys_.a0_diag) {
                sys_.a0_diag(vnode.data(), diag.data());
                for (int c = 0; c < n; ++c) {
                    if (diag[c] < sys_.c0 / 2.0)
                        throw A0SingularError("A0 lost definiteness at a grid node");
                    rphys[c][i] /= diag[c];
                }
            } else {
                sys_.a0_full(vnode.data(), mat.data());
                CMatrix a0(n, n);
                for (int r = 0; r < n; ++r)
                    for (int c = 0; c < n; ++c) a0(r, c) = mat[r * n + c];
                const EigResult eig = herm_eig(a0);
                if (eig.values.front() < sys_.c0 / 2.0)
                    throw A0SingularError("A0 lost definiteness at a grid node");
                std::vector<Complex> r(n);
                for (int c = 0; c < n; ++c) r[c] = rphys[c][i];
                const auto y = eig.vectors.adjoint().apply(r);
                std::vector<Complex> z(n);
                for (int c = 0; c < n; ++c) z[c] = y[c] / eig.values[c];
                const auto x = eig.vectors.apply(z);
                for (int c = 0; c < n; ++c) rphys[c][i] = x[c];
            }
        }
        std::vector<Complex> coefs(m);
        for (int c = 0; c < n; ++c) {
            fourier_.to_coef(rphys[c].data(), coefs.data());
            for (long f = 0; f < m; ++f) rhs.at(c, f) = coefs[f];
        }
    }

    double step_limit(const SpectralState& u, const StepPolicy& policy) const {
        if (policy.dt_override > 0.0) return policy.dt_override;
        double h = policy.c_stiff * sys_.delta;
        const double speed = max_wave_speed(u);
        if (speed > 0.0) h = std::min(h, policy.c_cfl * grid_.dx() / speed);
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

    /// Constant A0 evaluated at v = 0.
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
        if (!props_.empty()) return;
        const int n = sys_.components;
        const long m = grid_.points();

        const CMatrix a0 = constant_a0();
        const EigResult a0eig = herm_eig(a0);
        CMatrix w(n, n), winv(n, n), a0inv(n, n);
        for (int k = 0; k < n; ++k) {
            if (a0eig.values[k] <= 0.0) throw A0SingularError("constant A0 is not positive definite");
            const double rt = std::sqrt(a0eig.values[k]);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const Complex o = a0eig.vectors(i, k) * std::conj(a0eig.vectors(j, k));
                    w(i, j) += rt * o;
                    winv(i, j) += (1.0 / rt) * o;
                    a0inv(i, j) += (1.0 / a0eig.values[k]) * o;
                }
        }

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

        SpectralState ghat(grid_, n);
        if (sys_.forcing_g) {
            ghat = state_from_function(fourier_, n, [&](const std::vector<double>& x) {
                std::vector<double> g(n);
                sys_.forcing_g(0.0, x.data(), g.data());
                return g;
            });
        }

        props_.resize(m);
        for (long f = 0; f < m; ++f) {
            const auto k = grid_.wavevector(f);
            CMatrix s = (1.0 / sys_.delta) * ltab_[f] + (1.0 / sys_.eps) * mtab_[f];
            for (size_t j = 0; j < aconst.size(); ++j)
                s += (im * static_cast<double>(k[j])) * aconst[j];
            ModeProp prop;
            prop.generator = -(a0inv * s);
            // symmetrize: W G W^{-1} = -W^{-1} S W^{-1} is skew, i times it hermitian
            const CMatrix h = im * (-(winv * s * winv));
            const EigResult eig = herm_eig(h);
            prop.freq.assign(eig.values.begin(), eig.values.end());
            prop.cols = winv * eig.vectors;
            prop.rows = eig.vectors.adjoint() * w;
            if (sys_.forcing_g) {
                std::vector<Complex> gk(n);
                for (int c = 0; c < n; ++c) gk[c] = ghat.at(c, f);
                prop.force = a0inv.apply(gk);
            }
            props_[f] = std::move(prop);
        }
    }

    /// u(t) = e^{tG} u0 + t phi1(tG) b per mode, with G = cols diag(-i w) rows.
    SpectralState propagate_exact(const SpectralState& u0, double t) const {
        const int n = sys_.components;
        SpectralState out(grid_, n, t);
        std::vector<Complex> v(n), y(n), z(n);
        for (long f = 0; f < grid_.points(); ++f) {
            const ModeProp& prop = props_[f];
            for (int c = 0; c < n; ++c) v[c] = u0.at(c, f);
            y = prop.rows.apply(v);
            for (int c = 0; c < n; ++c) y[c] *= std::exp(Complex{0.0, -prop.freq[c] * t});
            z = prop.cols.apply(y);
            if (!prop.force.empty()) {
                auto fb = prop.rows.apply(prop.force);
                for (int c = 0; c < n; ++c) {
                    const Complex a{0.0, -prop.freq[c]};
                    const Complex phi = std::abs(a) * t < 1e-8
                                            ? Complex{1.0, 0.0}
                                            : (std::exp(a * t) - 1.0) / (a * t);
                    fb[c] *= t * phi;
                }
                const auto fz = prop.cols.apply(fb);
                for (int c = 0; c < n; ++c) z[c] += fz[c];
            }
            for (int c = 0; c < n; ++c) out.at(c, f) = z[c];
        }
        return out;
    }

    /// d2u/dt2 from the t-differentiated PDE with u_t kept in place.
    SpectralState second_deriv_quasilinear(const SpectralState& u0, const SpectralState& ut) const {
        const int n = sys_.components;
        const long m = grid_.points();
        if (sys_.forcing_g || sys_.forcing_h)
            throw UnsupportedSystemError("exact u_tt with forcing is not supported");
        if (sys_.has_a0() && (!sys_.a0_diag || !sys_.da0_diag))
            throw UnsupportedSystemError("exact u_tt needs the diagonal A0 form with its derivative");
        for (size_t j = 0; j < sys_.a_adv.size(); ++j)
            if (j >= sys_.da_adv.size() || !sys_.da_adv[j])
                throw UnsupportedSystemError("exact u_tt needs advection derivatives");

        SpectralState rhs(grid_, n, 0.0);
        std::vector<Complex> v(n);
        for (long f = 0; f < m; ++f) {
            for (int c = 0; c < n; ++c) v[c] = ut.at(c, f);
            const auto lu = ltab_[f].apply(v);
            const auto mu = mtab_[f].apply(v);
            for (int c = 0; c < n; ++c) rhs.at(c, f) = -lu[c] / sys_.delta - mu[c] / sys_.eps;
        }

        const auto uphys = to_grid_values(fourier_, u0);
        const auto utphys = to_grid_values(fourier_, ut);
        std::vector<std::vector<Complex>> acc(n, std::vector<Complex>(m, Complex{}));
        std::vector<double> unode(n), wnode(n), amat(static_cast<size_t>(n) * n), dmat(static_cast<size_t>(n) * n);
        std::vector<std::vector<Complex>> duphys(n), dutphys(n);
        for (size_t j = 0; j < sys_.a_adv.size(); ++j) {
            const SpectralState du = derivative(u0, static_cast<int>(j));
            const SpectralState dut = derivative(ut, static_cast<int>(j));
            for (int c = 0; c < n; ++c) {
                duphys[c].resize(m);
                dutphys[c].resize(m);
                fourier_.to_grid(du.comp_data(c), duphys[c].data());
                fourier_.to_grid(dut.comp_data(c), dutphys[c].data());
            }
            for (long i = 0; i < m; ++i) {
                for (int c = 0; c < n; ++c) {
                    unode[c] = uphys[c][i].real();
                    wnode[c] = utphys[c][i].real();
                }
                sys_.a_adv[j](unode.data(), amat.data());
                sys_.da_adv[j](unode.data(), wnode.data(), dmat.data());
                for (int r = 0; r < n; ++r) {
                    Complex s{};
                    for (int c = 0; c < n; ++c)
                        s += amat[r * n + c] * dutphys[c][i] + dmat[r * n + c] * duphys[c][i];
                    acc[r][i] -= s;
                }
            }
        }
        // - (d/dt A0)(u) u_t = - dA0(eps u)[eps u_t] u_t (diagonal form)
        if (sys_.has_a0()) {
            std::vector<double> vnode(n), wt(n), ddiag(n);
            for (long i = 0; i < m; ++i) {
                for (int c = 0; c < n; ++c) {
                    vnode[c] = sys_.eps * uphys[c][i].real();
                    wt[c] = sys_.eps * utphys[c][i].real();
                }
                sys_.da0_diag(vnode.data(), wt.data(), ddiag.data());
                for (int c = 0; c < n; ++c) acc[c][i] -= ddiag[c] * utphys[c][i];
            }
        }
        std::vector<Complex> coefs(m);
        for (int c = 0; c < n; ++c) {
            fourier_.to_coef(acc[c].data(), coefs.data());
            for (long f = 0; f < m; ++f) rhs.at(c, f) += coefs[f];
        }
        if (sys_.has_a0()) apply_a0_inverse(rhs, uphys);
        if (sys_.nonlinear()) dealias(rhs);
        return rhs;
    }

    /// w -> -A0(eps u0)^{-1} ((1/delta) L + (1/eps) M) w with A0 frozen at u0.
    SpectralState stiff_apply_frozen(const SpectralState& u0, const SpectralState& w) const {
        const int n = sys_.components;
        SpectralState rhs(grid_, n, 0.0);
        std::vector<Complex> v(n);
        for (long f = 0; f < grid_.points(); ++f) {
            for (int c = 0; c < n; ++c) v[c] = w.at(c, f);
            const auto lu = ltab_[f].apply(v);
            const auto mu = mtab_[f].apply(v);
            for (int c = 0; c < n; ++c) rhs.at(c, f) = -lu[c] / sys_.delta - mu[c] / sys_.eps;
        }
        if (sys_.has_a0()) {
            const auto uphys = to_grid_values(fourier_, u0);
            apply_a0_inverse(rhs, uphys);
        }
        return rhs;
    }

    SystemSpec sys_;
    GridSpec grid_;
    Fourier fourier_;
    std::vector<CMatrix> ltab_, mtab_;
    mutable std::vector<ModeProp> props_;
};

} // namespace tsl
