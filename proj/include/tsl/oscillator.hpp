#pragma once

// Closed-form solution of the stiff oscillator
//   a(eps w) u_t = v/delta,  a(eps w) v_t = -u/delta,  w_t = 0,
// written as z = u + iv:  z(t,x) = z0 exp(-i t / (delta a(eps w0(x)))).
// The modulus is constant, all oscillation sits in the phase, so norms of
// derivatives are computed by sampling the phase factor and transforming.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "tsl/grid.hpp"

namespace tsl {

struct OscillatorSpec {
    std::function<double(double)> a = [](double v) { return 1.0 + v; };  ///< a(v) > 0
    std::function<double(double)> w0 = [](double x) { return std::cos(x); };
    double z0 = 0.0; ///< initial amplitude; 0 means "use delta" (well-prepared)
};

inline Complex oscillator_exact(const OscillatorSpec& spec, double delta, double eps,
                                double x, double t) {
    const double amp = spec.z0 == 0.0 ? delta : spec.z0;
    const double phase = -t / (delta * spec.a(eps * spec.w0(x)));
    return amp * std::exp(Complex{0.0, phase});
}

namespace detail {

/// Sample points for resolving exp(i phi): estimate max |phi'| from finite
/// differences of the smooth profile 1/a(eps w0(x)) and take 8 points per
/// wavelength, rounded up to a power of two.
inline int oscillator_samples(const OscillatorSpec& spec, double delta, double eps, double t) {
    const int probe = 2048;
    double hmax = 0.0;
    const double dx = 2.0 * M_PI / probe;
    double prev = 1.0 / spec.a(eps * spec.w0(0.0));
    for (int i = 1; i <= probe; ++i) {
        const double cur = 1.0 / spec.a(eps * spec.w0(i * dx));
        hmax = std::max(hmax, std::abs(cur - prev) / dx);
        prev = cur;
    }
    const double kmax = std::abs(t) / delta * hmax;
    int n = 64;
    while (n < 8.0 * (kmax + 4.0) && n < (1 << 22)) n *= 2;
    return n;
}

} // namespace detail

/// L2 norm of d_x^l d_t^k z at time t (coefficient convention). Spatial
/// derivatives are spectral on a grid fine enough for the phase; the time
/// derivative brings down the pointwise factor (-i/(delta a))^k.
inline double oscillator_deriv_norm(const OscillatorSpec& spec, double delta, double eps,
                                    double t, int ell, int k_time = 0) {
    const int n = detail::oscillator_samples(spec, delta, eps, t);
    const GridSpec g(1, n);
    Fourier fourier(g);
    std::vector<Complex> z(n);
    for (int i = 0; i < n; ++i) {
        const double x = g.dx() * i;
        Complex v = oscillator_exact(spec, delta, eps, x, t);
        const Complex dt_factor{0.0, -1.0 / (delta * spec.a(eps * spec.w0(x)))};
        for (int k = 0; k < k_time; ++k) v *= dt_factor;
        z[i] = v;
    }
    std::vector<Complex> coef(n);
    fourier.to_coef(z.data(), coef.data());
    double acc = 0.0;
    for (long f = 0; f < n; ++f) {
        const double kf = static_cast<double>(g.freq(static_cast<int>(f)));
        acc += std::pow(kf * kf, ell) * std::norm(coef[f]);
    }
    return std::sqrt(acc);
}

/// Sobolev norm |z(t)|_{H^s} combining spatial derivatives 0..s.
inline double oscillator_sobolev(const OscillatorSpec& spec, double delta, double eps,
                                 double t, int s) {
    const int n = detail::oscillator_samples(spec, delta, eps, t);
    const GridSpec g(1, n);
    Fourier fourier(g);
    std::vector<Complex> z(n);
    for (int i = 0; i < n; ++i) z[i] = oscillator_exact(spec, delta, eps, g.dx() * i, t);
    std::vector<Complex> coef(n);
    fourier.to_coef(z.data(), coef.data());
    double acc = 0.0;
    for (long f = 0; f < n; ++f) {
        const double k2 = g.k_norm2(f);
        acc += std::pow(1.0 + k2, s) * std::norm(coef[f]);
    }
    return std::sqrt(acc);
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace tsl
