#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twistcount/arith.hpp"
#include "twistcount/curve.hpp"
#include "twistcount/error.hpp"

namespace twistcount {

/// (x:y:z) on d y^2 z = F~(x,z), gcd(x,y,z) = 1. The identity is (0:1:0).
struct ProjPoint {
    mpz_class x{0}, y{1}, z{0};

    bool is_identity() const { return z == 0; }
    bool operator==(const ProjPoint& o) const { return x == o.x && y == o.y && z == o.z; }
    std::string str() const { return "(" + x.get_str() + ":" + y.get_str() + ":" + z.get_str() + ")"; }
};

/// Affine model d Y^2 = F(X) with exact rationals.
struct AffinePoint {
    bool infinity = true;
    mpq_class X, Y;
};

inline void canonicalize(ProjPoint& P) {
    mpz_class g = gcd(gcd(P.x, P.y), P.z);
    if (g == 0) throw PreconditionError("ProjPoint: all coordinates zero");
    P.x /= g;
    P.y /= g;
    P.z /= g;
    // fix the sign so that z > 0 (identity: y > 0)
    if (P.z < 0 || (P.z == 0 && P.y < 0)) {
        P.x = -P.x;
        P.y = -P.y;
        P.z = -P.z;
    }
}

inline ProjPoint make_point(const mpz_class& x, const mpz_class& y, const mpz_class& z) {
    ProjPoint P{x, y, z};
    canonicalize(P);
    return P;
}

inline bool on_twist(const CurveModel& c, const mpz_class& d, const ProjPoint& P) {
    return d * P.y * P.y * P.z == f_tilde(c, P.x, P.z);
}

inline AffinePoint to_affine(const ProjPoint& P) {
    if (P.is_identity()) return {};
    AffinePoint a;
    a.infinity = false;
    a.X = mpq_class(P.x, P.z);
    a.Y = mpq_class(P.y, P.z);
    a.X.canonicalize();
    a.Y.canonicalize();
    return a;
}

inline ProjPoint to_proj(const AffinePoint& a) {
    if (a.infinity) return ProjPoint{};
    mpz_class l = lcm(a.X.get_den(), a.Y.get_den());
    mpz_class x = a.X.get_num() * (l / a.X.get_den());
    mpz_class y = a.Y.get_num() * (l / a.Y.get_den());
    return make_point(x, y, l);
}

// ---------------------------------------------------------------------------
// Group law on d Y^2 = X^3 + A X + B

inline AffinePoint negate(const AffinePoint& P) {
    if (P.infinity) return P;
    return {false, P.X, -P.Y};
}

inline AffinePoint add(const CurveModel& c, const mpz_class& d, const AffinePoint& P, const AffinePoint& Q) {
    if (P.infinity) return Q;
    if (Q.infinity) return P;
    mpq_class lam;
    if (P.X == Q.X) {
        if (P.Y + Q.Y == 0) return {};
        lam = (3 * P.X * P.X + c.A) / (2 * mpq_class(d) * P.Y);
    } else {
        lam = (Q.Y - P.Y) / (Q.X - P.X);
    }
    AffinePoint R;
    R.infinity = false;
    R.X = mpq_class(d) * lam * lam - P.X - Q.X;
    R.Y = lam * (P.X - R.X) - P.Y;
    return R;
}

inline AffinePoint multiply(const CurveModel& c, const mpz_class& d, const AffinePoint& P, long n) {
    if (n < 0) return multiply(c, d, negate(P), -n);
    AffinePoint R, base = P;
    while (n) {
        if (n & 1) R = add(c, d, R, base);
        base = add(c, d, base, base);
        n >>= 1;
    }
    return R;
}

inline ProjPoint add(const CurveModel& c, const mpz_class& d, const ProjPoint& P, const ProjPoint& Q) {
    return to_proj(add(c, d, to_affine(P), to_affine(Q)));
}

inline ProjPoint negate(const ProjPoint& P) {
    if (P.is_identity()) return P;
    return make_point(P.x, -P.y, P.z);
}

inline ProjPoint multiply(const CurveModel& c, const mpz_class& d, const ProjPoint& P, long n) {
    return to_proj(multiply(c, d, to_affine(P), n));
}

/// True iff nP = O for some 1 <= n <= 12.
inline bool is_torsion(const CurveModel& c, const mpz_class& d, const ProjPoint& P) {
    if (P.is_identity()) return true;
    AffinePoint a = to_affine(P), cur = a;
    for (int n = 1; n <= 12; ++n) {
        if (cur.infinity) return true;
        cur = add(c, d, cur, a);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Heights

inline long double log_abs(const mpz_class& v) {
    if (v == 0) return -INFINITY;
    long e;
    double m = mpz_get_d_2exp(&e, v.get_mpz_t());
    return std::log(std::fabs(static_cast<long double>(m))) + e * std::log(2.0L);
}

inline long double height_pair(mpz_class x, mpz_class z) {
    normalize_pair(x, z);
    return log_abs(abs(x) > abs(z) ? x : z);
}

inline long double naive_height_x(const ProjPoint& P) {
    if (P.is_identity()) return 0;
    return height_pair(P.x, P.z);
}

/// Duplication on x-coordinates: (x:z) -> (phi : psi).
inline std::pair<mpz_class, mpz_class> duplicate_x(const CurveModel& c, const mpz_class& x, const mpz_class& z) {
    mpz_class x2 = x * x, z2 = z * z;
    mpz_class phi = x2 * x2 - 2 * c.A * x2 * z2 - 8 * c.B * x * z2 * z + mpz_class(c.A) * c.A * z2 * z2;
    mpz_class psi = 4 * z * (x2 * x + c.A * x * z2 + c.B * z2 * z);
    return {phi, psi};
}

namespace detail {

inline long double dup_max(long double A, long double B, long double a, long double b) {
    long double a2 = a * a, b2 = b * b;
    long double phi = a2 * a2 - 2 * A * a2 * b2 - 8 * B * a * b2 * b + A * A * b2 * b2;
    long double psi = 4 * b * (a2 * a + A * a * b2 + B * b2 * b);
    return std::max(std::fabs(phi), std::fabs(psi));
}

}  // namespace detail

/// Per-curve constants controlling the duplication telescope
///   h^ - h_x/2 = (1/2) sum_n (eps_n - log g_n) / 4^{n+1},
/// where eps_n in [log_min, log_max] and 0 <= log g_n <= log_gcd_max.
struct DuplicationBounds {
    mpz_class M;                // 256 (4A^3 + 27B^2)^2, divisible by every g_n
    long double log_min = 0;    // lower bound of log max(|phi|,|psi|) on the real locus, unit box
    long double log_max = 0;    // upper bound of the same
    long double log_gcd_max = 0;  // sum_p m_p log p with m_p = max v_p(g)
    std::map<u64, int> padic;   // m_p

    long double per_step() const { return std::max(log_max, log_gcd_max - log_min); }
};

namespace detail {

/// Max v_p(gcd(phi(a,1), psi(a,1))) over a in Z_p (the chart b = 1 suffices:
/// phi(1, b) is a unit for b in pZ_p).
inline int padic_gcd_depth(const CurveModel& c, u64 p, int cap) {
    struct Node {
        mpz_class a;
        int k;
    };
    const bool small = p < kBruteForcePrime;
    int best = 0;
    std::vector<Node> stack;
    if (small) {
        stack.push_back({0, 0});
    } else {
        // p odd and p | psi(a, 1) = 4 F(a) force a to be a root of F mod p
        for (u64 r : roots_mod_p(c, p)) {
            auto [phi, psi] = duplicate_x(c, mpz_class(static_cast<unsigned long>(r)), mpz_class(1));
            if (mpz_divisible_ui_p(phi.get_mpz_t(), p) && mpz_divisible_ui_p(psi.get_mpz_t(), p))
                stack.push_back({mpz_class(static_cast<unsigned long>(r)), 1});
        }
    }
    std::size_t visited = 0;
    mpz_class pk, mp(static_cast<unsigned long>(p));
    while (!stack.empty()) {
        Node n = stack.back();
        stack.pop_back();
        if (++visited > 2'000'000) return cap;
        best = std::max(best, n.k);
        if (n.k >= cap) continue;
        mpz_ui_pow_ui(pk.get_mpz_t(), p, n.k);
        if (small) {
            mpz_class pk1 = pk * static_cast<unsigned long>(p);
            for (u64 t = 0; t < p; ++t) {
                mpz_class a = n.a + pk * static_cast<unsigned long>(t);
                auto [phi, psi] = duplicate_x(c, a, mpz_class(1));
                if (mpz_divisible_p(phi.get_mpz_t(), pk1.get_mpz_t()) && mpz_divisible_p(psi.get_mpz_t(), pk1.get_mpz_t()))
                    stack.push_back({a, n.k + 1});
            }
            continue;
        }
        // k >= 1: f(a + p^k t) = f(a) + p^k t f'(a) mod p^{k+1}, so each condition is linear in t mod p
        auto [phi, psi] = duplicate_x(c, n.a, mpz_class(1));
        const mpz_class& a = n.a;
        mpz_class dphi = 4 * a * a * a - 4 * c.A * a - 8 * c.B;
        mpz_class dpsi = 4 * (3 * a * a + c.A);
        std::optional<mpz_class> t;
        bool any = true, none = false;
        for (auto [f, df] : {std::pair(phi, dphi), std::pair(psi, dpsi)}) {
            mpz_class c0 = mpz_class(f / pk) % mp, c1 = df % mp;
            if (c0 < 0) c0 += mp;
            if (c1 < 0) c1 += mp;
            if (c1 == 0) {
                if (c0 != 0) none = true;
                continue;
            }
            mpz_class inv;
            mpz_invert(inv.get_mpz_t(), c1.get_mpz_t(), mp.get_mpz_t());
            mpz_class s = mpz_class(-c0 * inv) % mp;
            if (s < 0) s += mp;
            if (t && *t != s) none = true;
            t = s;
            any = false;
        }
        if (none) continue;
        if (any) return cap;  // every lift survives; cap is a valid upper bound
        stack.push_back({a + pk * *t, n.k + 1});
    }
    return best;
}

inline DuplicationBounds compute_bounds(const CurveModel& c) {
    DuplicationBounds b;
    mpz_class D = 4 * mpz_class(c.A) * c.A * c.A + 27 * mpz_class(c.B) * c.B;
    b.M = 256 * D * D;
    // M = 2^8 D^2, factored through D to stay within 64 bits longer
    std::map<u64, int> fac{{2, 8}};
    for (auto [p, e] : factorize(mpz_class(abs(D))).factors) fac[p] += 2 * e;
    for (auto [p, e] : fac) {
        int m = padic_gcd_depth(c, p, e);
        b.padic[p] = m;
        b.log_gcd_max += m * std::log(static_cast<long double>(p));
    }

    // numeric extrema of max(|phi|,|psi|) on the two edges of the unit box, over real points
    const long double A = c.A, B = c.B, aA = std::fabs(A), aB = std::fabs(B);
    const int grid = 200000;
    const long double step = 2.0L / grid;
    // Lipschitz constants of phi, psi along each edge
    const long double lip1 = std::max(4 + 4 * aA + 8 * aB, 12 + 4 * aA);
    const long double lip2 = std::max(4 * aA + 24 * aB + 4 * A * A, 4 + 12 * aA + 16 * aB);
    const long double lip = std::max(lip1, lip2);
    long double lo = INFINITY, hi = 0;
    for (int edge = 0; edge < 2; ++edge) {
        std::vector<char> real(grid + 1);
        std::vector<long double> val(grid + 1);
        for (int i = 0; i <= grid; ++i) {
            long double s = -1 + i * step;
            long double a = edge == 0 ? s : 1, bb = edge == 0 ? 1 : s;
            long double ft = a * a * a + A * a * bb * bb + B * bb * bb * bb;
            real[i] = ft * bb >= 0;
            val[i] = dup_max(A, B, a, bb);
        }
        for (int i = 0; i <= grid; ++i) {
            bool near = real[i] || (i > 0 && real[i - 1]) || (i < grid && real[i + 1]);
            if (near) lo = std::min(lo, val[i]);
            hi = std::max(hi, val[i]);
        }
    }
    long double margin = lip * step;
    lo -= margin;
    hi += margin;
    long double coarse_hi = std::log(8 * c.C0() * c.C0());
    b.log_max = std::min(std::log(hi), coarse_hi);
    if (lo <= 0) lo = 1e-300L;  // resultant nonzero, so this only happens for absurdly large A, B
    b.log_min = std::log(lo);
    return b;
}

}  // namespace detail

/// Cached per (A, B); construction is serialized, lookups are shared.
inline const DuplicationBounds& duplication_bounds(const CurveModel& c) {
    static std::mutex mu;
    static std::map<std::pair<std::int64_t, std::int64_t>, std::unique_ptr<DuplicationBounds>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::pair(c.A, c.B);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<DuplicationBounds>(detail::compute_bounds(c))).first;
    return *it->second;
}

/// Canonical height (normalized as (1/2) lim h(x(2^n P)) / 4^n), accurate to tol.
/// Only the x-coordinate enters, so the value does not depend on d.
inline long double canonical_height(const CurveModel& c, const ProjPoint& P, long double tol = 1e-10L) {
    if (!(tol > 0)) throw PreconditionError("canonical_height: tol must be positive");
    if (P.is_identity()) return 0;
    if (P.y == 0) throw TorsionError("canonical_height: point is 2-torsion");
    const auto& bd = duplication_bounds(c);
    const long double E = bd.per_step();
    // remainder after N terms is at most E / (6 * 4^N)
    int N = 1;
    while (E / (6 * std::pow(4.0L, N)) > tol / 4) ++N;

    mpz_class x = P.x, z = P.z;
    normalize_pair(x, z);
    long double h0 = height_pair(x, z);

    mpz_class mod;
    mpz_pow_ui(mod.get_mpz_t(), bd.M.get_mpz_t(), N + 1);
    mpz_class a = x % mod, b = z % mod;

    // floating normalized pair, max(|ar|, |br|) = 1
    long double ar, br;
    {
        long double lx = log_abs(x), lz = log_abs(z), top = std::max(lx, lz);
        ar = x == 0 ? 0 : std::copysign(std::exp(lx - top), static_cast<long double>(sgn(x)));
        br = z == 0 ? 0 : std::copysign(std::exp(lz - top), static_cast<long double>(sgn(z)));
    }

    const long double A = c.A, B = c.B;
    long double sum = 0, w = 0.25L;
    for (int n = 0; n < N; ++n) {
        long double a2 = ar * ar, b2 = br * br;
        long double phi = a2 * a2 - 2 * A * a2 * b2 - 8 * B * ar * b2 * br + A * A * b2 * b2;
        long double psi = 4 * br * (a2 * ar + A * ar * b2 + B * b2 * br);
        long double m = std::max(std::fabs(phi), std::fabs(psi));
        long double eps = std::log(m);

        auto [ph, ps] = duplicate_x(c, a, b);
        ph %= mod;
        ps %= mod;
        mpz_class g = gcd(gcd(ph, ps), bd.M);
        mod /= g;
        a = (ph / g) % mod;
        b = (ps / g) % mod;

        sum += w * (eps - log_abs(g));
        w /= 4;
        ar = phi / m;
        br = psi / m;
    }
    return 0.5L * (h0 + sum);
}

/// (1/2) h(x(2^n P)) / 4^n with exact integer duplication (reference values).
inline long double exact_doubling_height(const CurveModel& c, const ProjPoint& P, int n) {
    if (P.is_identity()) return 0;
    mpz_class x = P.x, z = P.z;
    normalize_pair(x, z);
    for (int i = 0; i < n; ++i) {
        auto [ph, ps] = duplicate_x(c, x, z);
        x = ph;
        z = ps;
        normalize_pair(x, z);
    }
    return 0.5L * height_pair(x, z) / std::pow(4.0L, n);
}

// ---------------------------------------------------------------------------
// Height gap  h1 <= h^ - h_x/2 <= h2

struct HeightGap {
    enum class Source { ExplicitBound, EmpiricalCalibration };
    long double h1 = 0;
    long double h2 = 0;
    Source source = Source::ExplicitBound;

    bool contains(long double diff) const { return h1 <= diff && diff <= h2; }
    long double C(int j) const { return std::exp(-2 * (j == 1 ? h1 : h2)); }
};

inline const char* to_string(HeightGap::Source s) {
    return s == HeightGap::Source::ExplicitBound ? "explicit-bound" : "empirical-calibration";
}

/// d-uniform bound from the duplication telescope.
inline HeightGap explicit_gap(const CurveModel& c) {
    const auto& bd = duplication_bounds(c);
    HeightGap g;
    g.h1 = std::min<long double>(0, (bd.log_min - bd.log_gcd_max) / 6);
    g.h2 = std::max<long double>(0, bd.log_max / 6);
    g.source = HeightGap::Source::ExplicitBound;
    return g;
}

inline long double height_discrepancy(const CurveModel& c, const ProjPoint& P, long double tol = 1e-10L) {
    return canonical_height(c, P, tol) - naive_height_x(P) / 2;
}

/// Empirical range of h^ - h_x/2 widened by 1.5, merged with the explicit bound (the wider wins).
inline HeightGap calibrate_gap(const CurveModel& c, const std::vector<std::pair<mpz_class, ProjPoint>>& sample) {
    if (sample.empty()) throw PreconditionError("calibrate_gap: empty sample");
    long double lo = 0, hi = 0;
    for (const auto& [d, P] : sample) {
        if (!on_twist(c, d, P)) throw PreconditionError("calibrate_gap: point not on its twist");
        long double v = height_discrepancy(c, P);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    HeightGap emp{1.5L * lo, 1.5L * hi, HeightGap::Source::EmpiricalCalibration};
    HeightGap ex = explicit_gap(c);
    if (emp.h1 < ex.h1 || emp.h2 > ex.h2) {
        emp.h1 = std::min(emp.h1, ex.h1);
        emp.h2 = std::max(emp.h2, ex.h2);
        return emp;
    }
    return ex;
}

}  // namespace twistcount
