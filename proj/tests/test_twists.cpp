#include <gtest/gtest.h>

#include <sstream>

#include "twistcount/twists.hpp"

using namespace twistcount;

TEST(Decompose, WorkedExamples) {
    auto c = build_curve(-1, 0);
    auto tp = decompose(c, 5, ProjPoint{-20, 6, 25});
    EXPECT_EQ(tp, (TwistPoint{1, 5, 6, 1, -4}));
    EXPECT_EQ(recompose(c, tp), (ProjPoint{-20, 6, 25}));
    auto tp2 = decompose(c, 6, ProjPoint{2, 1, 1});
    EXPECT_EQ(tp2, (TwistPoint{6, 1, 1, 1, 2}));
    EXPECT_EQ(recompose(c, TwistPoint{6, 1, 1, 1, 2}), (ProjPoint{2, 1, 1}));
    EXPECT_THROW(decompose(c, 7, ProjPoint{2, 1, 1}), DomainError);
    EXPECT_THROW(recompose(c, TwistPoint{5, 1, 1, 1, 2}), DomainError);
}

TEST(Decompose, RoundTripOnMultiples) {
    auto c = build_curve(-1, 0);
    ProjPoint P{-20, 6, 25};
    for (long n = 1; n <= 4; ++n) {
        ProjPoint Q = multiply(c, 5, P, n);
        if (!Q.x.fits_slong_p() || !Q.z.fits_slong_p() || Q.z > mpz_class("1000000000000")) break;
        auto tp = decompose(c, 5, Q);
        EXPECT_EQ(recompose(c, tp), Q);
    }
}

namespace {

struct Case {
    long A, B;
};

const std::vector<Case> kCurves = {{-1, 0}, {0, 1}, {0, 2}};  // lambda = 3, 2, 1

}  // namespace

TEST(Enumerate, MatchesBruteForce) {
    for (auto [A, B] : kCurves) {
        auto c = build_curve(A, B);
        auto gap = explicit_gap(c);
        for (long X : {100L, 1000L})
            for (long double alpha : {0.05L, 0.1L}) {
                auto fast = enumerate_small_points(c, X, alpha, gap);
                auto slow = brute_force_count(c, X, alpha, gap);
                EXPECT_TRUE(reports_equal(fast, slow)) << c.label() << " X=" << X << " alpha=" << (double)alpha
                                                       << " fast N*=" << fast.N_star << " slow N*=" << slow.N_star;
                EXPECT_EQ(check_report(c, fast), "");
                for (const auto& [d, v] : fast.per_d)
                    for (const auto& r : v) {
                        ASSERT_TRUE(r.has_twist_point);
                        EXPECT_EQ(recompose(c, r.tp), r.P);
                        EXPECT_EQ(decompose(c, d, r.P), r.tp);
                    }
            }
    }
}

TEST(Enumerate, WorkersDeterministic) {
    auto c = build_curve(0, 2);
    auto gap = explicit_gap(c);
    EnumerationOptions one, three;
    three.workers = 3;
    auto a = enumerate_small_points(c, 20000, 0.1L, gap, one);
    auto b = enumerate_small_points(c, 20000, 0.1L, gap, three);
    EXPECT_TRUE(reports_equal(a, b));
}

TEST(Enumerate, EmptyBelowFirstTwist) {
    auto c = build_curve(-1, 0);
    auto r = enumerate_small_points(c, 2, 0.05L, explicit_gap(c));
    EXPECT_EQ(r.N_star, 0);
    EXPECT_TRUE(r.per_d.empty());
}

TEST(Enumerate, Monotone) {
    auto c = build_curve(-1, 0);
    auto gap = explicit_gap(c);
    std::int64_t prev = -1;
    for (long X : {200L, 500L, 2000L, 5000L}) {
        auto r = enumerate_small_points(c, X, 0.05L, gap);
        EXPECT_GE(r.N_star, prev);
        prev = r.N_star;
    }
    prev = -1;
    for (long double a : {0.01L, 0.03L, 0.06L, 0.1L}) {
        auto r = enumerate_small_points(c, 5000, a, gap);
        EXPECT_GE(r.N_star, prev);
        prev = r.N_star;
    }
}

TEST(Enumerate, BudgetError) {
    auto c = build_curve(-1, 0);
    EnumerationOptions o;
    o.candidate_budget = 10;
    try {
        enumerate_small_points(c, 100000, 0.1L, explicit_gap(c), o);
        FAIL() << "expected budget error";
    } catch (const BudgetError& e) {
        EXPECT_FALSE(e.partial().empty());
    }
}

TEST(Eta, Values) {
    EXPECT_TRUE(std::isinf(eta({})));
    auto c = build_curve(-1, 0);
    auto gap = explicit_gap(c);
    // h^(-20:6:25) = 0.9497..., admissible for d = 5 only once alpha > 0.465
    auto r = enumerate_small_points(c, 100, 0.5L, gap);
    ASSERT_TRUE(r.per_d.count(5));
    long double e5 = r.eta.at(5);
    long double at_worked = std::exp(canonical_height(c, ProjPoint{-20, 6, 25}, 1e-6L));
    EXPECT_LE(e5, at_worked * (1 + 1e-9));
    long double cst = eta_lower_constant(c, gap);
    for (auto [d, e] : r.eta) {
        if (std::isfinite(e)) {
            EXPECT_GE(e, cst * std::pow((long double)d, 0.125L));
        }
    }
}

TEST(Extremal, Family) {
    auto c = build_curve(-1, 0);
    auto fam = extremal_family(c, 1000);
    bool six = false;
    for (const auto& m : fam) {
        EXPECT_TRUE(squarefree(m.d));
        EXPECT_TRUE(on_twist(c, m.d, m.P));
        EXPECT_EQ(m.P.y, 1);
        if (m.d == 6 && m.x == 2 && m.z == 1) six = true;
    }
    EXPECT_TRUE(six);
    // brute oracle: all x, z <= 1000
    std::vector<std::tuple<long, long, long>> brute;
    for (long z = 1; z <= 1000; ++z)
        for (long x = 1; x <= 1100; ++x) {
            mpz_class d = z * f_tilde(c, x, z);
            if (d > 0 && d <= 1000 && squarefree(d.get_ui())) brute.emplace_back(d.get_si(), z, x);
        }
    std::sort(brute.begin(), brute.end());
    ASSERT_EQ(fam.size(), brute.size());
    for (std::size_t i = 0; i < fam.size(); ++i) {
        EXPECT_EQ(fam[i].d, std::get<0>(brute[i]));
        EXPECT_EQ(fam[i].z, std::get<1>(brute[i]));
        EXPECT_EQ(fam[i].x, std::get<2>(brute[i]));
    }
    // members with a small point show up in the enumeration
    auto gap = explicit_gap(c);
    auto rep = enumerate_small_points(c, 1000, 0.1L, gap);
    for (const auto& m : fam) {
        long double h = canonical_height(c, m.P, 1e-6L);
        if (!height_admissible(h, m.d, 0.1L, 1e-6L)) continue;
        auto it = rep.per_d.find(m.d);
        ASSERT_NE(it, rep.per_d.end());
        EXPECT_TRUE(std::any_of(it->second.begin(), it->second.end(), [&](const PointRecord& r) { return r.P == m.P; }));
    }
}

TEST(Extremal, IrrationalRootsBruteForce) {
    auto c = build_curve(0, 2);
    auto fam = extremal_family(c, 3000);
    std::size_t brute = 0;
    for (long z = 1; z <= 3000; ++z)
        for (long x = 1; x <= 3000; ++x) {
            mpz_class d = z * f_tilde(c, x, z);
            if (d > 3000) break;
            if (d > 0 && squarefree(d.get_ui())) ++brute;
        }
    EXPECT_GT(brute, 10u);
    EXPECT_EQ(fam.size(), brute);
}

TEST(Report, RoundTrip) {
    auto c = build_curve(0, 1);
    auto r = enumerate_small_points(c, 1000, 0.1L, explicit_gap(c));
    std::stringstream ss;
    write_report(ss, r);
    auto back = read_report(ss);
    EXPECT_EQ(back.X, r.X);
    EXPECT_EQ(back.A, 0);
    EXPECT_EQ(back.B, 1);
    EXPECT_TRUE(reports_equal(r, back, 1e-12L));
    for (const auto& [d, v] : back.per_d)
        for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i].tp, r.per_d.at(d)[i].tp);
}
