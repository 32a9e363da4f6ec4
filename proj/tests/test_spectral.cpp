#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support.hpp"
#include "tsl/grid.hpp"

using namespace tsl;
using testsupport::Rng;

TEST_CASE("grid mode indexing round-trips", "[spectral]") {
    const GridSpec g(2, 16);
    REQUIRE(g.points() == 256);
    for (long f = 0; f < g.points(); ++f) {
        const auto k = g.wavevector(f);
        REQUIRE(g.flat_of(k) == f);
        for (int j = 0; j < 2; ++j) {
            REQUIRE(k[j] >= -7);
            REQUIRE(k[j] <= 8);
        }
    }
    REQUIRE_THROWS_AS(GridSpec(2, 7), ConfigError);
    REQUIRE_THROWS_AS(GridSpec(0, 16), ConfigError);
}

TEST_CASE("transform round-trip is exact to machine precision", "[spectral]") {
    Rng rng(301ull);
    const GridSpec g(2, 16);
    Fourier fourier(g);
    SpectralState u(g, 2);
    for (auto& c : u.coef) c = Complex{rng.sym(), rng.sym()};
    std::vector<Complex> vals(g.points()), back(g.points());
    for (int c = 0; c < 2; ++c) {
        fourier.to_grid(u.comp_data(c), vals.data());
        fourier.to_coef(vals.data(), back.data());
        for (long f = 0; f < g.points(); ++f)
            REQUIRE(std::abs(back[f] - u.at(c, f)) <= 1e-13);
    }
}

TEST_CASE("cosine products land on the expected coefficients", "[spectral]") {
    const GridSpec g(2, 32);
    Fourier fourier(g);
    // f = cos x cos 2y has coefficients 1/4 at (+-1, +-2)
    const auto u = state_from_function(fourier, 1, [](const std::vector<double>& x) {
        return std::vector<double>{std::cos(x[0]) * std::cos(2.0 * x[1])};
    });
    REQUIRE(std::abs(u.at(0, g.flat_of({1, 2})) - 0.25) <= 1e-14);
    REQUIRE(std::abs(u.at(0, g.flat_of({-1, 2})) - 0.25) <= 1e-14);
    REQUIRE(std::abs(u.at(0, g.flat_of({1, -2})) - 0.25) <= 1e-14);
    REQUIRE(std::abs(u.at(0, g.flat_of({-1, -2})) - 0.25) <= 1e-14);
    REQUIRE(std::abs(u.at(0, g.flat_of({0, 0}))) <= 1e-14);
    REQUIRE(real_field_defect(u) <= 1e-14);
    // discrete Parseval: |f|_L2^2 averaged equals the coefficient sum = 1/4
    REQUIRE(l2_norm(u) == Catch::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("spectral derivative is exact on band-limited data", "[spectral]") {
    const GridSpec g(1, 16);
    Fourier fourier(g);
    const auto u = state_from_function(fourier, 1, [](const std::vector<double>& x) {
        return std::vector<double>{std::sin(3.0 * x[0])};
    });
    const auto du = derivative(u, 0);
    const auto want = state_from_function(fourier, 1, [](const std::vector<double>& x) {
        return std::vector<double>{3.0 * std::cos(3.0 * x[0])};
    });
    REQUIRE(l2_distance(du, want) <= 1e-13);
}

TEST_CASE("sobolev norm applies the multiplier weights", "[spectral]") {
    const GridSpec g(1, 16);
    Fourier fourier(g);
    const auto u = state_from_function(fourier, 1, [](const std::vector<double>& x) {
        return std::vector<double>{std::cos(2.0 * x[0])};
    });
    // coefficients 1/2 at k = +-2: H^s^2 = 2 (1+4)^s / 4
    for (double s : {0.0, 1.0, 2.0}) {
        const double want = std::sqrt(2.0 * std::pow(5.0, s) * 0.25);
        REQUIRE(sobolev_norm(u, s) == Catch::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("dealiasing zeroes the top third of the spectrum", "[spectral]") {
    Rng rng(311ull);
    const GridSpec g(2, 12); // cutoff at |k| > 4
    SpectralState u(g, 1);
    for (auto& c : u.coef) c = Complex{rng.sym(), rng.sym()};
    dealias(u);
    for (long f = 0; f < g.points(); ++f) {
        const auto k = g.wavevector(f);
        const bool outside = std::abs(k[0]) > 4 || std::abs(k[1]) > 4;
        if (outside)
            REQUIRE(std::abs(u.at(0, f)) == 0.0);
        else
            REQUIRE(std::abs(u.at(0, f)) > 0.0);
    }
}

TEST_CASE("real field defect detects broken symmetry", "[spectral]") {
    const GridSpec g(1, 8);
    SpectralState u(g, 1);
    u.at(0, g.flat_of({1})) = Complex{0.5, 0.25};
    u.at(0, g.flat_of({-1})) = Complex{0.5, -0.25};
    REQUIRE(real_field_defect(u) <= 1e-15);
    u.at(0, g.flat_of({-1})) = Complex{0.5, 0.25};
    REQUIRE(real_field_defect(u) == Catch::Approx(0.5));
}
