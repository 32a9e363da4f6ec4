#pragma once

// Torus grid, spectral states, and the Fourier transform layer. Coefficients
// follow the finite-series convention u(x) = sum_k u_hat(k) e^{i k.x}, so the
// discrete L2 pairing Sum_k |u_hat|^2 equals the grid average of |u|^2.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "tsl/cmatrix.hpp"
#include "tsl/errors.hpp"

namespace tsl {

/// Uniform grid on the d-torus with period 2 pi and N modes per axis.
/// Resolved integer wavenumbers run over [-N/2+1, N/2].
struct GridSpec {
    int dim = 1;
    int n_modes = 8; ///< per axis, even and >= 8

    GridSpec() = default;
    GridSpec(int d, int n) : dim(d), n_modes(n) {
        if (d < 1 || d > 3) throw ConfigError("grid dimension must be 1..3");
        if (n < 8 || n % 2 != 0) throw ConfigError("modes per axis must be even and >= 8");
    }

    long points() const {
        long p = 1;
        for (int j = 0; j < dim; ++j) p *= n_modes;
        return p;
    }

    double dx() const { return 2.0 * M_PI / n_modes; }

    /// FFT-layout index along one axis -> signed frequency.
    int freq(int idx) const { return idx <= n_modes / 2 ? idx : idx - n_modes; }

    std::vector<int> wavevector(long flat) const {
        std::vector<int> k(dim);
        for (int j = dim - 1; j >= 0; --j) {
            k[j] = freq(static_cast<int>(flat % n_modes));
            flat /= n_modes;
        }
        return k;
    }

    long flat_of(const std::vector<int>& k) const {
        long f = 0;
        for (int j = 0; j < dim; ++j) {
            int idx = k[j] >= 0 ? k[j] : k[j] + n_modes;
            f = f * n_modes + idx;
        }
        return f;
    }

    double k_norm2(long flat) const {
        double s = 0.0;
        for (int j = dim - 1; j >= 0; --j) {
            const int kj = freq(static_cast<int>(flat % n_modes));
            s += static_cast<double>(kj) * kj;
            flat /= n_modes;
        }
        return s;
    }

    bool operator==(const GridSpec& o) const { return dim == o.dim && n_modes == o.n_modes; }
};

/// Fourier coefficients of an n-component field over a torus grid.
struct SpectralState {
    GridSpec grid;
    int components = 1;
    double time = 0.0;
    std::vector<Complex> coef; ///< [component][flat mode]

    SpectralState() = default;
    SpectralState(GridSpec g, int n, double t = 0.0)
        : grid(g), components(n), time(t), coef(static_cast<size_t>(n) * g.points()) {}

    Complex& at(int comp, long flat) { return coef[static_cast<size_t>(comp) * grid.points() + flat]; }
    Complex at(int comp, long flat) const { return coef[static_cast<size_t>(comp) * grid.points() + flat]; }

    Complex* comp_data(int comp) { return coef.data() + static_cast<size_t>(comp) * grid.points(); }
    const Complex* comp_data(int comp) const { return coef.data() + static_cast<size_t>(comp) * grid.points(); }

    SpectralState& operator+=(const SpectralState& o) {
        for (size_t i = 0; i < coef.size(); ++i) coef[i] += o.coef[i];
        return *this;
    }
    SpectralState& operator-=(const SpectralState& o) {
        for (size_t i = 0; i < coef.size(); ++i) coef[i] -= o.coef[i];
        return *this;
    }
    SpectralState& operator*=(double s) {
        for (auto& c : coef) c *= s;
        return *this;
    }
    /// this += s * o
    void axpy(double s, const SpectralState& o) {
        for (size_t i = 0; i < coef.size(); ++i) coef[i] += s * o.coef[i];
    }

    bool finite() const {
        for (const auto& c : coef)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
        return true;
    }
};

/// L2 norm in the coefficient convention (all components).
inline double l2_norm(const SpectralState& u) {
    double s = 0.0;
    for (const auto& c : u.coef) s += std::norm(c);
    return std::sqrt(s);
}

inline double l2_distance(const SpectralState& a, const SpectralState& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.coef.size(); ++i) s += std::norm(a.coef[i] - b.coef[i]);
    return std::sqrt(s);
}

/// Sobolev norm sum_k (1+|k|^2)^s |u_hat(k)|^2 over all components, rooted.
inline double sobolev_norm(const SpectralState& u, double s) {
    const long m = u.grid.points();
    double acc = 0.0;
    for (long f = 0; f < m; ++f) {
        const double w = std::pow(1.0 + u.grid.k_norm2(f), s);
        for (int c = 0; c < u.components; ++c) acc += w * std::norm(u.at(c, f));
    }
    return std::sqrt(acc);
}

/// Hermitian-symmetry defect max_k |u_hat(-k) - conj(u_hat(k))| of a state
/// meant to represent a real field.
inline double real_field_defect(const SpectralState& u) {
    const long m = u.grid.points();
    double worst = 0.0;
    for (long f = 0; f < m; ++f) {
        auto k = u.grid.wavevector(f);
        bool ok = true;
        for (int j = 0; j < u.grid.dim; ++j) {
            if (k[j] == u.grid.n_modes / 2) { ok = false; break; } // Nyquist pairs with itself
            k[j] = -k[j];
        }
        if (!ok) continue;
        const long g = u.grid.flat_of(k);
        for (int c = 0; c < u.components; ++c)
            worst = std::max(worst, std::abs(u.at(c, g) - std::conj(u.at(c, f))));
    }
    return worst;
}

/// Zero every mode with |k_j| > N/3 on some axis (2/3-rule dealiasing).
inline void dealias(SpectralState& u) {
    const long m = u.grid.points();
    const int cut = u.grid.n_modes / 3;
    for (long f = 0; f < m; ++f) {
        const auto k = u.grid.wavevector(f);
        bool kill = false;
        for (int j = 0; j < u.grid.dim; ++j)
            if (std::abs(k[j]) > cut) { kill = true; break; }
        if (kill)
            for (int c = 0; c < u.components; ++c) u.at(c, f) = 0.0;
    }
}

/// FFTW-backed transforms for one grid. Plans are created once per instance
/// and executed through an internal buffer, so callers keep value semantics.
class Fourier {
public:
    explicit Fourier(GridSpec g) : grid_(g) {
        const long m = grid_.points();
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m));
        std::vector<int> dims(grid_.dim, grid_.n_modes);
        fwd_ = fftw_plan_dft(grid_.dim, dims.data(), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft(grid_.dim, dims.data(), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    ~Fourier() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    Fourier(const Fourier&) = delete;
    Fourier& operator=(const Fourier&) = delete;

    const GridSpec& grid() const { return grid_; }

    /// Coefficients -> grid values (unnormalized inverse DFT matches the
    /// finite-series convention exactly).
    void to_grid(const Complex* coefs, Complex* values) const {
        const long m = grid_.points();
        for (long i = 0; i < m; ++i) {
            buf_[i][0] = coefs[i].real();
            buf_[i][1] = coefs[i].imag();
        }
        fftw_execute(bwd_);
        for (long i = 0; i < m; ++i) values[i] = Complex{buf_[i][0], buf_[i][1]};
    }

    /// Grid values -> coefficients (forward DFT scaled by 1/points).
    void to_coef(const Complex* values, Complex* coefs) const {
        const long m = grid_.points();
        for (long i = 0; i < m; ++i) {
            buf_[i][0] = values[i].real();
            buf_[i][1] = values[i].imag();
        }
        fftw_execute(fwd_);
        const double inv = 1.0 / static_cast<double>(m);
        for (long i = 0; i < m; ++i) coefs[i] = inv * Complex{buf_[i][0], buf_[i][1]};
    }

private:
    GridSpec grid_;
    fftw_complex* buf_;
    fftw_plan fwd_, bwd_;
};

/// Physical-space view of a state: values[comp][node].
inline std::vector<std::vector<Complex>> to_grid_values(const Fourier& f, const SpectralState& u) {
    std::vector<std::vector<Complex>> v(u.components, std::vector<Complex>(u.grid.points()));
    for (int c = 0; c < u.components; ++c) f.to_grid(u.comp_data(c), v[c].data());
    return v;
}

/// Physical coordinates of a flat node index.
inline std::vector<double> node_coords(const GridSpec& g, long flat) {
    std::vector<double> x(g.dim);
    for (int j = g.dim - 1; j >= 0; --j) {
        x[j] = g.dx() * static_cast<double>(flat % g.n_modes);
        flat /= g.n_modes;
    }
    return x;
}

/// Spectral derivative d/dx_axis (multiplication by i k_axis).
inline SpectralState derivative(const SpectralState& u, int axis) {
    SpectralState d = u;
    const long m = u.grid.points();
    for (long f = 0; f < m; ++f) {
        const auto k = u.grid.wavevector(f);
        const Complex ik = im * static_cast<double>(k[axis]);
        for (int c = 0; c < u.components; ++c) d.at(c, f) = ik * u.at(c, f);
    }
    return d;
}

/// Build a state from a callable comp_values(x) evaluated on the grid.
template <typename F>
SpectralState state_from_function(const Fourier& fourier, int components, F&& values_at, double t = 0.0) {
    const GridSpec& g = fourier.grid();
    SpectralState u(g, components, t);
    const long m = g.points();
    std::vector<std::vector<Complex>> vals(components, std::vector<Complex>(m));
    for (long i = 0; i < m; ++i) {
        const auto x = node_coords(g, i);
        const auto v = values_at(x); // returns vector<double> or vector<Complex>
        for (int c = 0; c < components; ++c) vals[c][i] = v[c];
    }
    for (int c = 0; c < components; ++c) fourier.to_coef(vals[c].data(), u.comp_data(c));
    return u;
}

} // namespace tsl
