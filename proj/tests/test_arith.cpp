#include <gtest/gtest.h>

#include <random>

#include "twistcount/arith.hpp"

using namespace twistcount;

namespace {

// residue scan, the oracle for everything root-counting
u64 brute_theta(const CurveModel& c, u64 n) {
    u64 cnt = 0;
    for (u64 x = 0; x < n; ++x) {
        i128 v = static_cast<i128>(x) * x * x + static_cast<i128>(c.A) * x + c.B;
        v %= static_cast<i128>(n);
        if (v == 0) ++cnt;
    }
    return cnt;
}

const CurveModel& xcube_minus_x() {
    static CurveModel c = build_curve(-1, 0);
    return c;
}

}  // namespace

TEST(Factorize, SmallCases) {
    EXPECT_TRUE(factorize(1).factors.empty());
    auto f = factorize(60);
    ASSERT_EQ(f.factors.size(), 3u);
    EXPECT_EQ(f.factors[0], (std::pair<u64, int>{2, 2}));
    EXPECT_EQ(f.factors[1], (std::pair<u64, int>{3, 1}));
    EXPECT_EQ(f.factors[2], (std::pair<u64, int>{5, 1}));
}

TEST(Factorize, LargePrime) {
    const u64 p = 1000000007ULL;
    bool prime = true;
    for (u64 d = 2; d * d <= p; ++d)
        if (p % d == 0) prime = false;
    ASSERT_TRUE(prime);
    auto f = factorize(p);
    ASSERT_EQ(f.factors.size(), 1u);
    EXPECT_EQ(f.factors[0].first, p);
}

TEST(Factorize, ProductMatchesValue) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        u64 n = rng() >> (rng() % 60);
        if (n == 0) n = 1;
        auto f = factorize(n);
        mpz_class prod = 1;
        u64 last = 0;
        for (auto [p, e] : f.factors) {
            EXPECT_GT(p, last);
            EXPECT_GE(e, 1);
            EXPECT_TRUE(nt::is_prime(p));
            last = p;
            for (int k = 0; k < e; ++k) prod *= static_cast<unsigned long>(p);
        }
        EXPECT_EQ(prod, f.value);
    }
    // semiprime of two ~2^31 primes
    u64 a = 2147483647ULL, b = 2147483629ULL;
    auto f = factorize(a * b);
    ASSERT_EQ(f.factors.size(), 2u);
    EXPECT_EQ(f.factors[0].first, b);
    EXPECT_EQ(f.factors[1].first, a);
}

TEST(Theta, WorkedValues) {
    const auto& c = xcube_minus_x();
    EXPECT_EQ(theta(c, 1), 1u);
    EXPECT_EQ(theta(c, 5), brute_theta(c, 5));
    EXPECT_EQ(theta(c, 5), 3u);
    EXPECT_EQ(theta(c, 15), 9u);
    EXPECT_EQ(theta(c, 4), 3u);
    EXPECT_EQ(theta(c, 4), brute_theta(c, 4));
}

TEST(Theta, MatchesBruteForce) {
    for (auto [A, B] : std::vector<std::pair<i64, i64>>{{-1, 0}, {0, 1}, {0, 2}, {-2, 1}, {3, -5}, {-7, 6}, {0, -432}}) {
        auto c = build_curve(A, B);
        for (u64 n = 1; n <= 1500; ++n) ASSERT_EQ(theta(c, n), brute_theta(c, n)) << c.label() << " n=" << n;
    }
}

TEST(Theta, SingularPrimePowers) {
    // 2^k on x^3 - x, and 3^k on x^3 + 2 (3 | Delta)
    auto c = xcube_minus_x();
    for (int k = 1; k <= 12; ++k) EXPECT_EQ(theta_prime_power(c, 2, k), brute_theta(c, u64(1) << k)) << k;
    auto c2 = build_curve(0, 2);
    u64 pk = 1;
    for (int k = 1; k <= 8; ++k) {
        pk *= 3;
        EXPECT_EQ(theta_prime_power(c2, 3, k), brute_theta(c2, pk)) << k;
    }
}

TEST(Theta, Multiplicative) {
    std::mt19937_64 rng(11);
    for (auto [A, B] : std::vector<std::pair<i64, i64>>{{-1, 0}, {0, 1}, {-2, 1}}) {
        auto c = build_curve(A, B);
        int done = 0;
        while (done < 1000) {
            u64 a = 1 + rng() % 10000, b = 1 + rng() % 10000;
            if (std::gcd(a, b) != 1) continue;
            ASSERT_EQ(theta(c, a * b), theta(c, a) * theta(c, b)) << a << " " << b;
            ++done;
        }
    }
}

TEST(Theta, PrimePowerStability) {
    for (auto [A, B] : std::vector<std::pair<i64, i64>>{{-1, 0}, {0, 1}, {-2, 1}, {3, -5}}) {
        auto c = build_curve(A, B);
        for (u64 p : nt::primes_up_to(500)) {
            if (mpz_divisible_ui_p(c.discriminant.get_mpz_t(), p)) continue;
            u64 t = theta(c, p);
            // go through the general lifting path, not the shortcut
            for (int k = 1; k <= 6 && k * std::log2(double(p)) < 60; ++k)
                ASSERT_EQ(roots_mod_prime_power(c, p, k).size(), t) << c.label() << " p=" << p << " k=" << k;
        }
    }
}

TEST(Theta, SplitTypes) {
    auto c3 = xcube_minus_x();
    ASSERT_EQ(c3.lambda, 3);
    auto c2 = build_curve(0, 1);
    ASSERT_EQ(c2.lambda, 2);
    auto chi = quad_character(c2);
    ASSERT_TRUE(chi.has_value());
    for (u64 p : nt::primes_up_to(10000)) {
        if (mpz_divisible_ui_p(c3.discriminant.get_mpz_t(), p) == 0) {
            ASSERT_EQ(theta(c3, p), 3u) << p;
        }
        if (mpz_divisible_ui_p(c2.discriminant.get_mpz_t(), p) == 0 && chi->modulus % p != 0) {
            ASSERT_EQ(static_cast<int>(theta(c2, p)), 2 + (*chi)(p)) << p;
        }
    }
}

TEST(QuadChar, WorkedValues) {
    auto c = build_curve(0, 1);
    auto chi = quad_character(c);
    ASSERT_TRUE(chi.has_value());
    EXPECT_EQ((*chi)(7), 1);
    EXPECT_EQ(theta(c, 7), 3u);
    EXPECT_EQ(roots_mod_p(c, 7), (std::vector<u64>{3, 5, 6}));
    EXPECT_EQ((*chi)(5), -1);
    EXPECT_EQ(theta(c, 5), 1u);
    EXPECT_EQ((*chi)(3), 0);
    EXPECT_FALSE(quad_character(xcube_minus_x()).has_value());
    EXPECT_FALSE(quad_character(build_curve(0, 2)).has_value());
}

TEST(QuadChar, PeriodicAndNonprincipal) {
    for (auto [A, B] : std::vector<std::pair<i64, i64>>{{0, 1}, {-3, 2 + 0}, {1, 2}, {-4, 3}}) {
        CurveModel c;
        try {
            c = build_curve(A, B);
        } catch (const SingularCurveError&) {
            continue;
        }
        if (c.lambda != 2) continue;
        auto chi = *quad_character(c);
        u64 N = chi.modulus;
        for (u64 n = 1; n < 3 * N; ++n) ASSERT_EQ(chi(n), chi(n + N));
        bool minus = false;
        for (u64 p : nt::primes_up_to(1000))
            if (N % p && chi(p) == -1) minus = true;
        EXPECT_TRUE(minus);
    }
}

TEST(ThetaSieve, Basics) {
    const auto& c = xcube_minus_x();
    EXPECT_EQ(theta_sieve(c, 1, 1), (std::vector<std::uint32_t>{1}));
    auto s1 = theta_sieve(c, 1, 10);
    for (u64 n = 1; n <= 10; ++n) EXPECT_EQ(s1[n - 1], brute_theta(c, n));
    auto s2 = theta_sieve(c, 2, 10);
    EXPECT_EQ(s2[1], 3u);
}

TEST(ThetaSieve, AgreesPointwise) {
    for (auto [A, B] : std::vector<std::pair<i64, i64>>{{-1, 0}, {0, 1}, {0, 2}, {-2, 1}}) {
        auto c = build_curve(A, B);
        for (int a : {1, 2}) {
            auto s = theta_sieve(c, a, 1000);
            for (u64 n = 1; n <= 1000; ++n) ASSERT_EQ(s[n - 1], theta(c, power(factorize(n), a))) << n;
        }
    }
}

TEST(ThetaSieve, WorkerCountIrrelevant) {
    auto c = build_curve(-2, 1);
    SieveOptions one, four;
    four.workers = 4;
    EXPECT_EQ(theta_sieve(c, 1, 20000, one), theta_sieve(c, 1, 20000, four));
}

TEST(ThetaSieve, MemoryBudget) {
    SieveOptions tiny;
    tiny.memory_budget_bytes = 1000;
    EXPECT_THROW(theta_sieve(xcube_minus_x(), 1, 100000, tiny), ResourceError);
}

TEST(Submultiplicative, Witness) {
    for (auto [A, B] : std::vector<std::pair<i64, i64>>{{-1, 0}, {0, 1}, {0, 2}}) {
        auto c = build_curve(A, B);
        u64 C = theta_submult_constant(c);
        for (u64 a = 1; a <= 300; ++a)
            for (u64 b = 1; b <= 300; ++b) ASSERT_LE(theta(c, a * b), C * theta(c, a) * theta(c, b));
    }
}

TEST(Phi, Values) {
    EXPECT_EQ(phi1(factorize(1)), 1);
    EXPECT_EQ(phi1(factorize(12)), mpq_class(1, 2));
    EXPECT_EQ(phi2(factorize(2)), mpq_class(3, 4));
    EXPECT_NEAR(static_cast<double>(sigma(-1, factorize(6))), 1.0 + 0.5 + 1.0 / 3 + 1.0 / 6, 1e-15);
    // sigma against a divisor walk
    for (u64 n = 1; n <= 200; ++n) {
        long double s = 0;
        for (u64 d = 1; d <= n; ++d)
            if (n % d == 0) s += std::pow(static_cast<long double>(d), -0.3L);
        EXPECT_NEAR(static_cast<double>(sigma(-0.3L, factorize(n))), static_cast<double>(s), 1e-12);
    }
}

TEST(W, SeriesTrivial) { EXPECT_DOUBLE_EQ(static_cast<double>(w_series(xcube_minus_x(), factorize(1), 1)), 1.0); }

TEST(W, LocalFactorAtGoodPrime) {
    // for p | n, p not dividing Delta: closed form local factor is theta(p)(1 - 1/p^2)/(1 + 2/p)
    const auto& c = xcube_minus_x();
    WContext w(c);
    for (u64 p : {3, 5, 7, 11, 13}) {
        long double pl = p;
        long double local = theta(c, p) * (1 - 1 / (pl * pl)) / (1 + 2 / pl);
        long double drop = 1 - static_cast<long double>(theta(c, p)) / (pl * (pl + 2));
        EXPECT_NEAR(static_cast<double>(w(factorize(p)).value), static_cast<double>(w.w0() * local / drop), 1e-15);
    }
}

TEST(W, SeriesMatchesClosedForm) {
    const auto& c = xcube_minus_x();
    WContext w(c, 10000000);
    for (u64 n : {1, 6}) {
        long double s = w_series(c, factorize(n), 1000000);
        EXPECT_NEAR(static_cast<double>(s), static_cast<double>(w(factorize(n)).value), 1e-6) << n;
    }
}

TEST(W, SeriesMatchesClosedFormAllSmallN) {
    for (auto [A, B] : std::vector<std::pair<i64, i64>>{{-1, 0}, {0, 2}}) {
        auto c = build_curve(A, B);
        WContext w(c);
        WSeries series(c, 1000000);
        for (u64 n = 1; n <= 100; ++n) {
            auto cf = w(factorize(n));
            long double s = series(factorize(n));
            ASSERT_NEAR(static_cast<double>(s), static_cast<double>(cf.value), 1e-4) << c.label() << " n=" << n;
        }
    }
}

TEST(W, SieveMatchesClosedForm) {
    auto c = build_curve(0, 2);
    WContext w(c);
    auto w1 = w1_sieve(c, 2000);
    for (u64 n = 1; n <= 2000; ++n)
        ASSERT_NEAR(w.w0() * w1[n - 1], static_cast<double>(w(factorize(n)).value), 1e-12) << n;
}

TEST(CountRootsInterval, WorkedValues) {
    const auto& c = xcube_minus_x();
    EXPECT_EQ(count_roots_interval(c, factorize(5), 1, 0, 5), 3u);
    EXPECT_EQ(count_roots_interval(c, factorize(5), 2, 0, 10), 6u);
    EXPECT_EQ(count_roots_interval(c, factorize(1), 17, 0, 42), 42u);
    EXPECT_THROW(count_roots_interval(c, factorize(6), 4, 0, 10), PreconditionError);
}

TEST(CountRootsInterval, ScanAndErrorBound) {
    std::mt19937_64 rng(3);
    for (auto [A, B] : std::vector<std::pair<i64, i64>>{{-1, 0}, {0, 1}, {-2, 1}}) {
        auto c = build_curve(A, B);
        for (int it = 0; it < 300; ++it) {
            u64 q = 1 + rng() % 400;
            i64 z = static_cast<i64>(rng() % 50) - 25;
            if (std::gcd<u64>(q, static_cast<u64>(std::abs(z))) != 1) continue;
            long double t1 = static_cast<long double>(rng() % 2000) - 1000 + 0.5L;
            long double t2 = t1 + 1 + static_cast<long double>(rng() % 3000) / 1.7L;
            u64 scan = 0;
            for (i64 n = static_cast<i64>(std::floor(t1)) + 1; n <= static_cast<i64>(std::floor(t2)); ++n) {
                i128 v = f_tilde_i128(c, n, z) % static_cast<i128>(q);
                if (v == 0) ++scan;
            }
            auto fq = factorize(q);
            u64 got = count_roots_interval(c, fq, z, t1, t2);
            ASSERT_EQ(got, scan);
            long double th = theta(c, fq);
            EXPECT_LE(std::fabs(static_cast<long double>(got) - (t2 - t1) * th / q), th);
        }
    }
}

namespace {
u64 brute_hb(i64 m1, i64 m2, u64 q, i64 X1, i64 X2) {
    u64 n = 0;
    for (i64 a = -X1; a <= X1; ++a)
        for (i64 b = -X2; b <= X2; ++b) {
            if (std::gcd(a, b) != 1) continue;
            i128 v = static_cast<i128>(a) * m1 + static_cast<i128>(b) * m2;
            if (v % static_cast<i128>(q) == 0) ++n;
        }
    return n;
}
}  // namespace

TEST(HeathBrownPairs, WorkedValues) {
    EXPECT_EQ(hb_pair_count(1, 0, 1, 1, 1), 8u);
    EXPECT_EQ(hb_pair_count(1, 1, 2, 2, 2), brute_hb(1, 1, 2, 2, 2));
    EXPECT_EQ(hb_pair_count(5, 9, 1, 7, 4), brute_hb(0, 0, 1, 7, 4));
}

TEST(HeathBrownPairs, RandomAgainstScan) {
    std::mt19937_64 rng(5);
    double worst = 0;
    for (int it = 0; it < 400; ++it) {
        u64 q = 1 + rng() % 300;
        i64 m1 = static_cast<i64>(rng() % 1000) - 500, m2 = static_cast<i64>(rng() % 1000) - 500;
        if (std::gcd(std::gcd<u64>(nt::mod_signed(m1, q), nt::mod_signed(m2, q)), q) != 1 && q != 1) continue;
        i64 X1 = 1 + rng() % 40, X2 = 1 + rng() % 40;
        u64 got = hb_pair_count(m1, m2, q, X1, X2);
        ASSERT_EQ(got, brute_hb(m1, m2, q, X1, X2));
        worst = std::max(worst, got / (double(X1) * X2 / q + 1));
    }
    EXPECT_LT(worst, 20.0);
}
