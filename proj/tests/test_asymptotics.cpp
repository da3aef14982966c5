#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "twistcount/asymptotics.hpp"

using namespace twistcount;

namespace {

const long double kPi = std::numbers::pi_v<long double>;

// partial sums of sum chi(n)/n, averaged over two consecutive cutoffs to damp the oscillation
long double l_chi_partial(std::int64_t D, std::uint64_t N) {
    long double s = 0, prev = 0;
    for (std::uint64_t n = 1; n <= N; ++n) {
        prev = s;
        s += nt::kronecker(D, n) / static_cast<long double>(n);
    }
    return (s + prev) / 2;
}

}  // namespace

TEST(Fit, RecoversPolynomial) {
    auto g = geometric_grid(1e3, 1e8, 10);
    std::vector<long double> v;
    for (auto X : g) {
        long double L = std::log((long double)X);
        v.push_back(X * (0.25L * L * L - 0.7L * L + 3));
    }
    auto f = fit_growth(g, v, 1, 2);
    EXPECT_NEAR(f.leading_coeff, 0.25, 1e-9);
    ASSERT_EQ(f.coeffs.size(), 3u);
    EXPECT_NEAR(f.coeffs[1], -0.7, 1e-8);
    EXPECT_NEAR(f.coeffs[0], 3, 1e-7);
    EXPECT_LT(f.model_residual, 1e-9);
    EXPECT_GT(f.residual, 0.05);  // the leading term alone misses the lower terms
}

TEST(Fit, DegenerateGrids) {
    auto f = fit_growth({1000}, {1234}, 1, 0);
    EXPECT_EQ(f.residual, 0);
    EXPECT_NEAR(f.leading_coeff, 1.234, 1e-12);
    // fewer points than coefficients falls back to the largest grid point
    auto h = fit_growth({100, 1000}, {10, 90}, 0.5L, 3);
    EXPECT_NEAR(h.leading_coeff, 90 / (std::sqrt(1000.0L) * std::pow(std::log(1000.0L), 3)), 1e-12);
    EXPECT_THROW(fit_growth({}, {}, 1, 0), PreconditionError);
}

TEST(Fit, GeometricGrid) {
    auto g = geometric_grid(1e4, 1e6, 10);
    EXPECT_EQ(g, (std::vector<std::int64_t>{10000, 100000, 1000000}));
    EXPECT_THROW(geometric_grid(10, 5, 2), PreconditionError);
    EXPECT_THROW(geometric_grid(1, 5, 1), PreconditionError);
}

TEST(SummatoryTheta, PrefixSumsMatchDirect) {
    auto c = build_curve(0, 1);
    std::vector<std::int64_t> grid{10, 57, 300};
    auto f = summatory_theta(c, 1, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        long double s = 0;
        for (std::int64_t n = 1; n <= grid[i]; ++n) s += theta(c, static_cast<std::uint64_t>(n));
        EXPECT_EQ(f.values[i], s);
    }
    EXPECT_THROW(summatory_theta(c, 1, {100, 50}), PreconditionError);
    EXPECT_THROW(summatory_theta(c, 1, {200'000'000}), ResourceError);
}

TEST(LChi, KnownValues) {
    EXPECT_NEAR(l_chi_at_one(-3), kPi / (3 * std::sqrt(3.0L)), 1e-15);
    EXPECT_NEAR(l_chi_at_one(-4), kPi / 4, 1e-15);
    EXPECT_NEAR(l_chi_at_one(5), 2 * std::log((1 + std::sqrt(5.0L)) / 2) / std::sqrt(5.0L), 1e-15);
    EXPECT_NEAR(l_chi_at_one(8), std::log(1 + std::sqrt(2.0L)) / std::sqrt(2.0L), 1e-15);
}

TEST(LChi, MatchesPartialSums) {
    for (std::int64_t D : {-7, -8, -15, -23, 12, 13, 21, -84, 28})
        EXPECT_NEAR(l_chi_at_one(D), l_chi_partial(D, 2'000'000), 1e-5) << D;
}

TEST(EulerResidue, BadLocalFactorMatchesDirectSum) {
    for (auto [A, B] : std::vector<std::pair<int, int>>{{-1, 0}, {0, 1}, {0, 2}, {-3, 5}})
        for (int a : {1, 2}) {
            auto c = build_curve(A, B);
            for (auto [p, e] : factorize(mpz_class(abs(c.discriminant))).factors) {
                long double s = 1, pk = 1;
                for (int k = 1; k * a <= 36 && k * a * std::log2((double)p) <= 60; ++k) {
                    pk /= p;
                    s += theta_prime_power(c, p, k * a) * pk;
                }
                // the truncated oracle misses at most 10 p^{-K}/(p-1)
                EXPECT_NEAR(detail::bad_local_factor(c, p, a), s, 1e-12 + 10 * pk / (p - 1)) << A << " " << B << " p=" << p;
            }
        }
}

TEST(EulerResidue, SignAndCharacter) {
    auto e3 = euler_residue(build_curve(-1, 0), 1, 100000);
    EXPECT_GT(e3.c1, 0);
    EXPECT_FALSE(e3.l_chi);
    EXPECT_TRUE(e3.tail_is_bound);
    auto e2 = euler_residue(build_curve(0, 1), 1, 100000);
    ASSERT_TRUE(e2.l_chi);
    EXPECT_EQ(e2.chi_discriminant, -3);
    EXPECT_NEAR(*e2.l_chi, kPi / (3 * std::sqrt(3.0L)), 1e-15);
    auto e1 = euler_residue(build_curve(0, 2), 1, 100000);
    EXPECT_FALSE(e1.tail_is_bound);
}

TEST(EulerResidue, AgreesWithSummatoryFit) {
    for (auto [A, B] : std::vector<std::pair<int, int>>{{-1, 0}, {0, 1}, {0, 2}}) {
        auto c = build_curve(A, B);
        auto f = summatory_theta(c, 1, geometric_grid(1e3, 1e6, std::sqrt(10.0L)));
        auto e = euler_residue(c, 1, 200000);
        EXPECT_NEAR(f.leading_coeff / e.c1, 1, 0.03) << c.label();
    }
}

TEST(SummatoryW, MatchesClosedFormSums) {
    auto c = build_curve(-1, 0);
    std::vector<std::int64_t> grid{20, 100};
    auto f = summatory_w(c, grid);
    WContext ctx(c);
    long double s = 0;
    std::size_t k = 0;
    for (std::int64_t n = 1; n <= 100; ++n) {
        s += ctx(factorize(static_cast<std::uint64_t>(n))).value;
        if (n == grid[k]) {
            EXPECT_NEAR(f.values[k] / s, 1, 1e-9);
            ++k;
        }
    }
}

TEST(SummatoryW, LeadingPositive) {
    for (auto [A, B] : std::vector<std::pair<int, int>>{{-1, 0}, {0, 1}, {0, 2}}) {
        auto f = summatory_w(build_curve(A, B), geometric_grid(1e3, 1e6, std::sqrt(10.0L)));
        EXPECT_GT(f.leading_coeff, 0);
        EXPECT_LT(f.model_residual, 0.02);
    }
    EXPECT_EQ(summatory_w(build_curve(0, 2), {5000}).residual, 0);
}

TEST(PhiSums, BruteForce) {
    auto c = build_curve(0, 1);
    const std::uint32_t X = 400;
    for (auto [l, q] : std::vector<std::pair<int, int>>{{1, 1}, {2, 3}, {5, 4}, {6, 35}}) {
        auto r = phi_sum_checks(c, l, q, X);
        long double s1 = 0, s2 = 0;
        for (std::uint64_t n = 1; n <= X; ++n) {
            if (nt::gcd(n, q) != 1) continue;
            auto f = factorize(l * n);
            long double v = 1;
            for (auto [p, e] : f.factors) v *= 1 - 1.0L / p;
            s1 += v;
            auto fn = factorize(n);
            bool sf = true;
            for (auto [p, e] : fn.factors) sf = sf && e == 1;
            if (sf) s2 += phi1(fn).get_d();
        }
        EXPECT_NEAR(r.sum1, s1, 1e-9);
        EXPECT_NEAR(r.sum2, s2, 1e-9);
    }
}

TEST(PhiSums, MainTerms) {
    auto c = build_curve(0, 1);
    auto r = phi_sum_checks(c, 1, 1, 1'000'000);
    EXPECT_LT(r.rel_err1(), 0.01);
    EXPECT_LT(r.rel_err2(), 0.01);
    auto r6 = phi_sum_checks(c, 2, 3, 1000);
    EXPECT_NEAR(r6.main1, 6 / (kPi * kPi) * 0.5L * 1000, 1e-9);
    auto r1 = phi_sum_checks(c, 6, 5, 1);
    EXPECT_NEAR(r1.sum1, 1.0L / 3, 1e-15);
    EXPECT_THROW(phi_sum_checks(c, 2, 4, 10), PreconditionError);
    EXPECT_TRUE(std::isfinite(r.C3));
    EXPECT_GT(r.C3, 0);
}

TEST(PhiSums, ErrorsShrink) {
    auto c = build_curve(-1, 0);
    int inversions1 = 0, inversions2 = 0;
    long double prev1 = 1e9, prev2 = 1e9;
    for (std::uint32_t X = 50'000; X <= 1'600'000; X *= 2) {
        auto r = phi_sum_checks(c, 1, 1, X);
        inversions1 += r.rel_err1() > prev1;
        inversions2 += r.rel_err2() > prev2;
        prev1 = r.rel_err1();
        prev2 = r.rel_err2();
    }
    EXPECT_LE(inversions1, 1);
    EXPECT_LE(inversions2, 1);
}

TEST(PhiSums, C2Converges) {
    long double a = c2_constant(100000), b = c2_constant(10'000'000);
    EXPECT_NEAR(a, b, 2e-5);
    EXPECT_GT(b, 0.47);
    EXPECT_LT(b, 0.48);
}

TEST(RegionG, Basics) {
    auto c = build_curve(0, 2);
    EXPECT_TRUE(std::isinf(region_G(c, 0.01, -2, 0.1, 0.5)));
    EXPECT_THROW(region_G(c, 0.01, 0.5, 0, 1), PreconditionError);
    long double g = region_G(c, 0.01, 0.5, 0.3, 0.7);
    long double z = 0.09L * 0.7L, w = 0.7L * (0.125L + 2 * z * z * z);
    long double e = 0.27L;
    long double expect = std::max({w, 0.5L / std::pow(w, e), z / std::pow(w, e), 0.3L / (std::sqrt(c.C0()) * std::pow(w, 0.04L))});
    EXPECT_NEAR(g, expect, 1e-15);
    EXPECT_EQ(in_region(c, 0.01, 0.5, 0.3, 0.7), g <= 1);
}

TEST(RegionG, ScalingIdentity) {
    std::mt19937_64 rng(7);
    for (auto [A, B] : std::vector<std::pair<int, int>>{{-1, 0}, {0, 2}, {-3, 5}}) {
        auto c = build_curve(A, B);
        for (int i = 0; i < 200; ++i) {
            long double alpha = 0.001L + (rng() % 1000) * 1e-5L;
            long double X = std::pow(10.0L, 4 + (rng() % 80) / 10.0L), C = 0.5L + (rng() % 100) / 50.0L;
            std::int64_t y = 1 + rng() % 20, x = static_cast<std::int64_t>(rng() % 2001) - 1000, z = 1 + rng() % 50,
                         d1 = 1 + rng() % 100;
            long double fX = C * std::pow(X, 0.25L + 2 * alpha), fZ = C * C * std::pow(X, 4 * alpha) / y,
                        fD = y * y * std::pow(X, 0.25L - 6 * alpha) / (C * C * C);
            long double t = x / fX, u = z / fZ, v = d1 / fD;
            long double lhs = v * (t * t * t + A * t * std::pow(u * u * v, 2) + B * std::pow(u * u * v, 3));
            long double rhs = d1 * f_tilde(c, x, mpz_class(d1) * z * z).get_d() / (y * y * X);
            EXPECT_NEAR(lhs, rhs, 1e-9L * std::max<long double>(1, std::fabs(rhs)));
        }
    }
}

TEST(Omega, DeterministicAcrossWorkers) {
    auto c = build_curve(0, 2);
    OmegaOptions o1, o3;
    o1.samples_per_slice = o3.samples_per_slice = 1 << 16;
    o3.workers = 3;
    auto a = omega_truncated(c, 0.01, 1e3, o1), b = omega_truncated(c, 0.01, 1e3, o3);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.std_error, b.std_error);
    o3.seed = 2;
    auto d = omega_truncated(c, 0.01, 1e3, o3);
    EXPECT_NE(a.estimate, d.estimate);
    EXPECT_LT(std::fabs(a.estimate - d.estimate), 4 * std::hypot(a.std_error, d.std_error));
}

TEST(Omega, NonincreasingInAlpha) {
    // with w <= 1 every constraint tightens as alpha grows, so the regions are nested
    auto c = build_curve(-1, 0);
    OmegaOptions o;
    o.samples_per_slice = 1 << 16;
    long double prev = std::numeric_limits<long double>::infinity();
    for (long double a : {0.005L, 0.01L, 0.015L}) {
        auto r = omega_truncated(c, a, 1e4, o);
        EXPECT_LE(r.estimate, prev);
        prev = r.estimate;
    }
}

TEST(Omega, SliceMassDoesNotDecay) {
    // the region has a cusp at small u, large v carrying mass ~ 1/v per unit v
    auto c = build_curve(0, 2);
    OmegaOptions o;
    o.samples_per_slice = 1 << 17;
    o.v_max = 1e6;
    RegionSample partial;
    EXPECT_THROW(omega(c, 0.01, 0.05, o, &partial), BudgetError);
    EXPECT_GT(partial.estimate, 0);
    EXPECT_LT(partial.decay_exponent, 1.2);
    EXPECT_TRUE(std::isinf(partial.tail_bound));
    EXPECT_THROW(omega(c, 0.2, 0.05, o), PreconditionError);
}

TEST(Omega, LatticeCountGrows) {
    auto c = build_curve(0, 2);
    auto a = lattice_region_count(c, 0.01, 1e8), b = lattice_region_count(c, 0.01, 1e10);
    EXPECT_GT(a.count, 0u);
    EXPECT_NEAR(a.scale, 1e4, 1e-6);
    EXPECT_GT(b.normalized(), a.normalized());
}

TEST(Growth, MatchesSeparateEnumerations) {
    auto c = build_curve(-1, 0);
    auto gap = explicit_gap(c);
    std::vector<std::int64_t> grid{300, 1000, 3000};
    auto g = growth_report(c, 0.1, grid, gap);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto r = enumerate_small_points(c, grid[i], 0.1, gap);
        EXPECT_EQ(g.N_star[i], r.N_star);
        EXPECT_EQ(g.N_dagger[i], r.N_dagger);
        EXPECT_EQ(g.N[i], r.N);
    }
    EXPECT_TRUE(g.inequality_holds);
    EXPECT_THROW(growth_report(c, 0.1, {}, gap), PreconditionError);
}
