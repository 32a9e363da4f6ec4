#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "tsl/reduction.hpp"

using namespace tsl;
using testsupport::Rng;

namespace {

// 2x2 pair: fast d/dx in the first component, off-diagonal d/dy coupling,
// evaluated at wavenumbers (k, l)
SymbolPair mode2x2(double k, double l) {
    const CMatrix t00{{im * k, 0.0}, {0.0, 0.0}};
    const CMatrix t01{{0.0, im * l}, {im * l, 0.0}};
    return make_symbol_pair(t00, t01, AdjointKind::SkewAdjoint);
}

// 5x5 constant-multiplier pair with parameters (a, b, c, d, m)
SymbolPair mult5(double a, double b, double c, double d, double m) {
    const CMatrix t00{{0, 1, 0, 0, 0},
                      {-1, 0, 0, 0, 0},
                      {0, 0, 0, 0, 0},
                      {0, 0, 0, 0, 0},
                      {0, 0, 0, 0, 0}};
    const CMatrix t01{{0, 0, 0, a, b},
                      {0, 0, 0, c, d},
                      {0, 0, im * m, 0, 0},
                      {-a, -c, 0, 0, 0},
                      {-b, -d, 0, 0, 0}};
    return make_symbol_pair(t00, t01, AdjointKind::SkewAdjoint);
}

void check_structure(const ReductionOutput& red, double tol = 1e-9) {
    const int n = red.limit_projection.rows();
    const CMatrix id = CMatrix::identity(n);
    CMatrix prod = id, sum_complement(n, n);
    for (const auto& lvl : red.levels) {
        REQUIRE((lvl.projection * lvl.projection - lvl.projection).max_abs() <= 1e-10);
        REQUIRE(self_adjoint_defect(lvl.projection) <= 1e-10);
        REQUIRE((lvl.projection * lvl.reduced).max_abs() <= tol * std::max(1.0, lvl.reduced.max_abs()));
        REQUIRE((lvl.reduced * lvl.projection).max_abs() <= tol * std::max(1.0, lvl.reduced.max_abs()));
        prod = prod * lvl.projection;
        sum_complement += id - lvl.projection;
    }
    // mutually orthogonal removed subspaces
    for (size_t j1 = 0; j1 < red.levels.size(); ++j1)
        for (size_t j2 = 0; j2 < red.levels.size(); ++j2) {
            if (j1 == j2) continue;
            const CMatrix c1 = id - red.levels[j1].projection;
            const CMatrix c2 = id - red.levels[j2].projection;
            REQUIRE((c1 * c2).max_abs() <= tol);
        }
    REQUIRE((red.limit_projection - prod).max_abs() <= tol);
    REQUIRE((red.limit_projection - (id - sum_complement)).max_abs() <= tol);
}

} // namespace

TEST_CASE("reduction of the 2x2 mode pair reproduces the closed forms", "[reduction]") {
    const auto red = reduce(mode2x2(2.0, 3.0), 3);
    REQUIRE(red.levels.size() == 3);
    // T(1,1) = 0
    REQUIRE(red.levels[1].reduced.max_abs() <= 1e-10);
    // T(2,2) = diag(0, -i l^2 / k) = diag(0, -4.5 i)
    const CMatrix& t22 = red.levels[2].reduced;
    REQUIRE(std::abs(t22(0, 0)) <= 1e-10);
    REQUIRE(std::abs(t22(0, 1)) <= 1e-10);
    REQUIRE(std::abs(t22(1, 0)) <= 1e-10);
    REQUIRE(std::abs(t22(1, 1) - Complex{0.0, -4.5}) <= 1e-10);
    // P(0) = diag(0, 1)
    const CMatrix& p0 = red.levels[0].projection;
    REQUIRE(std::abs(p0(0, 0)) <= 1e-12);
    REQUIRE(std::abs(p0(1, 1) - 1.0) <= 1e-12);
    check_structure(red);
    // depth 3 removes the T(2,2) eigenvector as well, so nothing survives
    REQUIRE(red.limit_projection.max_abs() <= 1e-10);
    REQUIRE(red.tpp.max_abs() <= 1e-10);
}

TEST_CASE("reduction at depth 2 keeps the slow component of the 2x2 pair", "[reduction]") {
    const auto red = reduce(mode2x2(2.0, 3.0), 2);
    REQUIRE(std::abs(red.limit_projection(1, 1) - 1.0) <= 1e-12);
    REQUIRE(std::abs(red.limit_projection(0, 0)) <= 1e-12);
    REQUIRE(std::abs(red.tpp(1, 1) - Complex{0.0, -4.5}) <= 1e-10);
    check_structure(red);
}

TEST_CASE("unperturbed pair: T01 = 0", "[reduction]") {
    Rng rng(31ull);
    const CMatrix t00 = testsupport::random_skew_with_kernel(rng, 5, 2);
    const auto red = reduce(make_symbol_pair(t00, CMatrix::zero(5, 5), AdjointKind::SkewAdjoint), 3);
    REQUIRE((red.levels[0].projection - null_projection(t00)).max_abs() <= 1e-12);
    for (int j = 1; j < 3; ++j) REQUIRE(red.levels[j].reduced.max_abs() <= 1e-12);
    REQUIRE((red.limit_projection - null_projection(t00)).max_abs() <= 1e-12);
    check_structure(red);
}

TEST_CASE("5x5 constant-multiplier pair, generic parameters", "[reduction]") {
    const auto red = reduce(mult5(1, 2, 3, 4, 5), 3);
    // T(1,1) = diag(0, 0, 5i, 0, 0)
    const CMatrix& t11 = red.levels[1].reduced;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const Complex want = (i == 2 && j == 2) ? Complex{0.0, 5.0} : Complex{};
            REQUIRE(std::abs(t11(i, j) - want) <= 1e-10);
        }
    // T(2,2) has exactly the entries (3,4) = bc - ad = 2 and (4,3) = ad - bc = -2
    const CMatrix& t22 = red.levels[2].reduced;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            Complex want{};
            if (i == 3 && j == 4) want = 2.0;
            if (i == 4 && j == 3) want = -2.0;
            REQUIRE(std::abs(t22(i, j) - want) <= 1e-10);
        }
    // ad - bc != 0: all eigenvalues accounted for, T(3,3) = 0 and nothing survives
    REQUIRE(red.tpp.max_abs() <= 1e-10);
    REQUIRE(red.limit_projection.max_abs() <= 1e-10);
    check_structure(red);
}

TEST_CASE("5x5 constant-multiplier pair, degenerate ad - bc = 0", "[reduction]") {
    const auto red = reduce(mult5(1, 2, 2, 4, 5), 4);
    REQUIRE(red.levels[2].reduced.max_abs() <= 1e-10); // T(2,2) = 0
    REQUIRE(red.levels[3].reduced.max_abs() <= 1e-10);
    REQUIRE(red.tpp.max_abs() <= 1e-10);
    // the exact two-dimensional kernel survives in the limit projection
    const CMatrix& pl = red.limit_projection;
    REQUIRE(std::abs(pl(3, 3) - 1.0) <= 1e-9);
    REQUIRE(std::abs(pl(4, 4) - 1.0) <= 1e-9);
    REQUIRE(std::abs(pl(0, 0)) <= 1e-9);
    check_structure(red);
}

TEST_CASE("generic recursion matches the hand formulas for T(1,1) and T(2,2)", "[reduction]") {
    Rng rng(47ull);
    for (int trial = 0; trial < 20; ++trial) {
        const SymbolPair pair = testsupport::random_reduction_pair(rng, 3, 3, 6);
        const auto red = reduce(pair, 3);
        const CMatrix& p0 = red.levels[0].projection;
        REQUIRE((red.levels[1].reduced - p0 * pair.t01 * p0).max_abs() <= 1e-10);
        const CMatrix& ptilde1 = red.levels[1].cumulative;
        const CMatrix hand =
            -(ptilde1 * pair.t01 * pseudo_inverse(pair.t00) * pair.t01 * ptilde1);
        REQUIRE((red.levels[2].reduced - hand).max_abs() <= 1e-10);
        check_structure(red);
    }
}

TEST_CASE("slow projection P(mu) converges to the limit projection", "[reduction]") {
    const SymbolPair pair = mode2x2(2.0, 3.0);
    // depth 2: the surviving slow component is diag(0,1), reached at rate O(mu)
    const CMatrix pmu = slow_projection_mu(pair, 2, 1e-3);
    CMatrix want(2, 2);
    want(1, 1) = 1.0;
    REQUIRE((pmu - want).max_abs() <= 1e-2);
    REQUIRE((pmu - want).max_abs() >= 1e-4); // the O(mu) tilt is genuinely there
    // depth 3: every eigenvalue is fast on that scale, so P(mu) = 0 = P(0)
    REQUIRE(slow_projection_mu(pair, 3, 1e-3).max_abs() <= 1e-12);
    REQUIRE(reduce(pair, 3).limit_projection.max_abs() <= 1e-10);
}

TEST_CASE("P(mu) equals the kernel projection when T01 = 0", "[reduction]") {
    Rng rng(53ull);
    const CMatrix t00 = testsupport::random_skew_with_kernel(rng, 4, 2);
    const SymbolPair pair = make_symbol_pair(t00, CMatrix::zero(4, 4), AdjointKind::SkewAdjoint);
    for (double mu : {1e-2, 1e-4}) {
        REQUIRE((slow_projection_mu(pair, 2, mu) - null_projection(t00)).max_abs() <= 1e-11);
    }
}

TEST_CASE("P(mu) -> P(0) with slope about one on random pairs", "[reduction]") {
    Rng rng(61ull);
    int tested = 0;
    for (int trial = 0; trial < 12 && tested < 6; ++trial) {
        const SymbolPair pair = testsupport::coupled_pair(rng, 6, 2 + rng.below(2));
        const int p = 2;
        const auto red = reduce(pair, p);
        std::vector<double> mus{1e-2, 1e-3, 1e-4}, errs;
        for (double mu : mus) errs.push_back(operator_norm(slow_projection_mu(pair, p, mu) - red.limit_projection));
        if (errs[0] < 1e-11 || errs[2] < 1e-13) continue; // correction vanished or at machine floor
        ++tested;
        REQUIRE(errs[0] > errs[1]);
        REQUIRE(errs[1] > errs[2]);
        const double slope = (std::log(errs[0]) - std::log(errs[2])) / (std::log(mus[0]) - std::log(mus[2]));
        REQUIRE(slope >= 0.9);
        REQUIRE(slope <= 2.2);
    }
    REQUIRE(tested >= 3);
}

TEST_CASE("P(mu) commutes with the pencil", "[reduction]") {
    Rng rng(71ull);
    for (int trial = 0; trial < 8; ++trial) {
        const SymbolPair pair = testsupport::random_reduction_pair(rng, 3, 5, 5);
        for (double mu : {1e-2, 1e-3}) {
            const CMatrix pmu = slow_projection_mu(pair, 3, mu);
            const CMatrix t = pencil_mu(pair, 3, mu);
            REQUIRE((pmu * t - t * pmu).max_abs() <= 1e-9 * operator_norm(t));
        }
    }
}

TEST_CASE("degenerate threshold is reported", "[reduction]") {
    // single mode with eigenvalue exactly on the contour: mu * x = mu^(p-1/2)
    const int p = 2;
    const double mu = 1e-2;
    const double x = std::pow(mu, p - 0.5) / mu;
    const SymbolPair pair = make_symbol_pair(CMatrix::zero(1, 1), CMatrix{{im * x}},
                                             AdjointKind::SkewAdjoint);
    REQUIRE_THROWS_AS(slow_projection_mu(pair, p, mu), DegenerateThresholdError);
}

TEST_CASE("spectral order report on the 2x2 mode pair", "[reduction]") {
    const SymbolPair pair = mode2x2(2.0, 3.0);
    const std::vector<double> mus{1e-2, 1e-3, 1e-4};
    const auto report = spectral_order_report(pair, 2, mus);
    REQUIRE(report.samples.size() == 3);
    REQUIRE(report.monotone_limit_error);
    // P(mu) T(mu) -> T(2,2) = diag(0, -4.5i)
    REQUIRE(report.samples.back().limit_error <= 1e-2);
    REQUIRE(report.samples.front().limit_error > report.samples.back().limit_error);
    for (const auto& s : report.samples) {
        REQUIRE(s.bounded_norm == Catch::Approx(4.5).margin(0.5));
        REQUIRE(s.mu * s.fast_min_singular >= 0.5); // fast branch stays >= c/mu
    }
}

TEST_CASE("spectral order report, invertible unperturbed operator", "[reduction]") {
    // T00 invertible and T01 = 0: P(mu) = 0, both norms collapse
    const CMatrix t00 = CMatrix::diagonal({im * 1.0, im * -2.0});
    const SymbolPair pair = make_symbol_pair(t00, CMatrix::zero(2, 2), AdjointKind::SkewAdjoint);
    const auto report = spectral_order_report(pair, 2, {1e-2, 1e-3});
    for (const auto& s : report.samples) {
        REQUIRE(s.bounded_norm == 0.0);
        REQUIRE(s.limit_error == 0.0);
        REQUIRE(std::isfinite(s.fast_min_singular));
    }
    const auto red = reduce(pair, 2);
    REQUIRE(red.tpp.max_abs() == 0.0);
}

TEST_CASE("eigenvalue clusters of the pencil match the level operators", "[reduction]") {
    Rng rng(83ull);
    const int p = 3;
    for (int trial = 0; trial < 10; ++trial) {
        const SymbolPair pair = testsupport::random_reduction_pair(rng, p);
        const auto red = reduce(pair, p);
        for (double mu : {1e-3, 1e-4}) {
            const CMatrix t = pencil_mu(pair, p, mu);
            const EigResult eig = herm_eig(im * t);
            for (int j = 0; j < p; ++j) {
                const EigResult lev = herm_eig(im * red.levels[j].reduced);
                for (double lam : lev.values) {
                    if (std::abs(lam) <= 1e-9) continue;
                    const double target = lam * std::pow(mu, j - p);
                    double best = std::numeric_limits<double>::infinity();
                    for (double e : eig.values) best = std::min(best, std::abs(e - target));
                    REQUIRE(best <= 5.0 * mu * std::abs(target));
                }
            }
        }
    }
}

TEST_CASE("symbol pair construction validates shape and adjointness", "[reduction]") {
    const CMatrix skew{{0.0, 1.0}, {-1.0, 0.0}};
    const CMatrix self{{1.0, 0.0}, {0.0, -2.0}};
    REQUIRE_THROWS_AS(make_symbol_pair(skew, CMatrix::zero(3, 3), AdjointKind::SkewAdjoint),
                      DimensionMismatchError);
    REQUIRE_THROWS_AS(make_symbol_pair(skew, self, AdjointKind::SkewAdjoint),
                      AdjointnessViolatedError);
    REQUIRE_THROWS_AS(make_symbol_pair(self, skew, AdjointKind::SelfAdjoint),
                      AdjointnessViolatedError);
    REQUIRE_NOTHROW(make_symbol_pair(self, -1.0 * self, AdjointKind::SelfAdjoint));
    const SymbolPair pair = make_symbol_pair(skew, CMatrix::zero(2, 2), AdjointKind::SkewAdjoint);
    REQUIRE_THROWS_AS(reduce(pair, 0), DimensionMismatchError);
}
