#pragma once

// The fixed cubic F(x) = x^3 + A x + B, its 2-torsion data and the group of
// projective automorphisms permuting x(E[2]).

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twistcount/error.hpp"
#include "twistcount/numtheory.hpp"

namespace twistcount {

using cplx = std::complex<long double>;

/// One root q of F, with the exact integer value when it is rational (a rational
/// root of a monic integer cubic is an integer).
struct CubicRoot {
    cplx value;
    std::optional<std::int64_t> exact;
    bool rational() const { return exact.has_value(); }
};

struct CurveModel {
    std::int64_t A = 0;
    std::int64_t B = 0;
    /// -(4A^3 + 27B^2)
    mpz_class discriminant;
    int lambda = 1;
    /// Integer roots of F, ascending.
    std::vector<std::int64_t> rational_two_torsion_x;
    int T2 = 1;
    /// All three roots q_2, q_3, q_4: rational ones first (ascending), then
    /// irrational ones ordered by (real, imag).
    std::array<CubicRoot, 3> roots;

    /// 1 + |A| + |B|
    long double C0() const { return 1.0L + std::fabs(static_cast<long double>(A)) + std::fabs(static_cast<long double>(B)); }
    std::string label() const { return "A=" + std::to_string(A) + ",B=" + std::to_string(B); }
};

inline mpz_class f_tilde(const CurveModel& c, const mpz_class& x, const mpz_class& z) {
    mpz_class z2 = z * z;
    return x * x * x + c.A * x * z2 + c.B * z2 * z;
}

/// Fast-path F~(x,z) for hot loops; caller guarantees the magnitudes fit.
inline nt::i128 f_tilde_i128(const CurveModel& c, nt::i128 x, nt::i128 z) {
    nt::i128 z2 = z * z;
    return x * x * x + static_cast<nt::i128>(c.A) * x * z2 + static_cast<nt::i128>(c.B) * z2 * z;
}

/// F(r) for an integer r (exact).
inline mpz_class f_value(const CurveModel& c, const mpz_class& r) { return r * r * r + c.A * r + c.B; }

/// Divide a projective pair by its gcd; sign fixed so that z > 0, or z = 0 and x > 0.
inline void normalize_pair(mpz_class& x, mpz_class& z) {
    mpz_class g = gcd(x, z);
    if (g != 0) {
        x /= g;
        z /= g;
    }
    if (z < 0 || (z == 0 && x < 0)) {
        x = -x;
        z = -z;
    }
}

namespace detail {

inline std::vector<std::int64_t> integer_roots(std::int64_t A, std::int64_t B) {
    std::vector<std::int64_t> out;
    auto test = [&](std::int64_t r) {
        mpz_class v = mpz_class(r) * r * r + mpz_class(A) * r + B;
        if (v == 0 && std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
    };
    if (B == 0) {
        test(0);
        // x^2 + A
        if (A <= 0) {
            auto s = static_cast<std::int64_t>(nt::isqrt(static_cast<nt::u64>(-A)));
            if (s * s == -A && s != 0) {
                test(s);
                test(-s);
            }
        }
    } else {
        nt::u64 absB = B < 0 ? static_cast<nt::u64>(-(B + 1)) + 1 : static_cast<nt::u64>(B);
        auto fac = nt::factor_u64(absB);
        std::vector<nt::u64> divs{1};
        for (auto [p, e] : fac) {
            std::size_t n = divs.size();
            nt::u64 pk = 1;
            for (int k = 1; k <= e; ++k) {
                pk *= p;
                for (std::size_t i = 0; i < n; ++i) divs.push_back(divs[i] * pk);
            }
        }
        for (nt::u64 d : divs) {
            if (d > static_cast<nt::u64>(INT64_MAX)) continue;
            test(static_cast<std::int64_t>(d));
            test(-static_cast<std::int64_t>(d));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline cplx polish_root(long double A, long double B, cplx z) {
    for (int i = 0; i < 60; ++i) {
        cplx f = z * z * z + A * z + B;
        cplx df = 3.0L * z * z + A;
        if (std::abs(df) == 0) break;
        cplx step = f / df;
        z -= step;
        if (std::abs(step) <= 1e-19L * (1 + std::abs(z))) break;
    }
    return z;
}

}  // namespace detail

/// Builds the curve model; throws SingularCurveError when 4A^3 + 27B^2 = 0.
inline CurveModel build_curve(std::int64_t A, std::int64_t B) {
    CurveModel c;
    c.A = A;
    c.B = B;
    mpz_class a(A), b(B);
    c.discriminant = -(4 * a * a * a + 27 * b * b);
    if (c.discriminant == 0) throw SingularCurveError("singular cubic: 4A^3 + 27B^2 = 0");

    c.rational_two_torsion_x = detail::integer_roots(A, B);
    const std::size_t nrat = c.rational_two_torsion_x.size();
    c.lambda = nrat == 0 ? 1 : (nrat == 1 ? 2 : 3);
    c.T2 = 1 + static_cast<int>(nrat);

    const long double Al = A, Bl = B;
    std::vector<CubicRoot> roots;
    for (auto r : c.rational_two_torsion_x) roots.push_back({cplx(static_cast<long double>(r), 0), r});

    std::vector<cplx> irr;
    if (nrat == 1) {
        long double r = static_cast<long double>(c.rational_two_torsion_x[0]);
        long double disc = -3 * r * r - 4 * Al;  // of x^2 + r x + (r^2 + A)
        cplx s = std::sqrt(cplx(disc, 0));
        irr.push_back(detail::polish_root(Al, Bl, (-r + s) / 2.0L));
        irr.push_back(detail::polish_root(Al, Bl, (-r - s) / 2.0L));
    } else if (nrat == 0) {
        // one real root by bisection, then deflate
        long double R = 1 + std::max(std::fabs(Al), std::fabs(Bl));
        long double lo = -R, hi = R;
        auto F = [&](long double x) { return x * x * x + Al * x + Bl; };
        for (int i = 0; i < 200; ++i) {
            long double mid = (lo + hi) / 2;
            if ((F(lo) < 0) == (F(mid) < 0))
                lo = mid;
            else
                hi = mid;
        }
        long double r = detail::polish_root(Al, Bl, cplx((lo + hi) / 2, 0)).real();
        long double disc = -3 * r * r - 4 * Al;
        cplx s = std::sqrt(cplx(disc, 0));
        irr.push_back(cplx(r, 0));
        irr.push_back(detail::polish_root(Al, Bl, (-r + s) / 2.0L));
        irr.push_back(detail::polish_root(Al, Bl, (-r - s) / 2.0L));
        for (auto& z : irr)
            if (std::fabs(z.imag()) < 1e-15L * (1 + std::abs(z))) z = cplx(z.real(), 0);
    }
    std::sort(irr.begin(), irr.end(), [](const cplx& x, const cplx& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    for (auto z : irr) roots.push_back({z, std::nullopt});
    for (int i = 0; i < 3; ++i) c.roots[i] = roots[i];
    return c;
}

// ---------------------------------------------------------------------------
// Translation by rational 2-torsion on x-coordinates

/// x(P + Q_k) for P with projective x-coordinate (x:t); k in {2,3,4} indexes
/// the roots in CurveModel::roots order. Result is reduced and sign-normalized.
inline std::pair<mpz_class, mpz_class> translate_x_by_torsion(const CurveModel& c, int k, const mpz_class& x,
                                                              const mpz_class& t) {
    if (k < 2 || k > 4) throw PreconditionError("translate_x_by_torsion: k must be in {2,3,4}");
    const CubicRoot& root = c.roots[k - 2];
    if (!root.rational()) throw NotRationalTorsionError("translate_x_by_torsion: q_k is irrational");
    mpz_class q(static_cast<long>(*root.exact));
    mpz_class nx = q * x + (2 * q * q + c.A) * t;
    mpz_class nt = x - q * t;
    if (nx == 0 && nt == 0) throw PreconditionError("translate_x_by_torsion: (x:t) = (q_k:1)");
    normalize_pair(nx, nt);
    return {nx, nt};
}

// ---------------------------------------------------------------------------
// Isom(P^1; x(E[2]))

using Perm4 = std::array<int, 4>;  // perm[i] = image of index i; 0 is the point at infinity

struct Mat2c {
    cplx a, b, c, d;
};

struct Mat2q {
    mpq_class a, b, c, d;
};

struct IsomElement {
    Perm4 perm;
    Mat2c matrix;
    std::optional<Mat2q> exact;
};

struct IsomGroup {
    std::vector<IsomElement> elements;
    int n_E = 2;

    std::size_t order() const { return elements.size(); }
    const IsomElement* find(const Perm4& p) const {
        for (const auto& e : elements)
            if (e.perm == p) return &e;
        return nullptr;
    }
};

/// The four points of x(E[2]) as projective pairs: index 0 = (1:0), index k = (q_{k+1}:1).
inline std::array<std::pair<cplx, cplx>, 4> two_torsion_points(const CurveModel& c) {
    return {std::pair{cplx(1), cplx(0)}, std::pair{c.roots[0].value, cplx(1)}, std::pair{c.roots[1].value, cplx(1)},
            std::pair{c.roots[2].value, cplx(1)}};
}

namespace detail {

inline Mat2c normalize(Mat2c m) {
    cplx s = std::abs(m.c) > 1e-12L ? m.c : m.d;
    return {m.a / s, m.b / s, m.c / s, m.d / s};
}

inline Mat2q normalize(Mat2q m) {
    mpq_class s = m.c != 0 ? m.c : m.d;
    return {m.a / s, m.b / s, m.c / s, m.d / s};
}

inline Mat2c mul(const Mat2c& x, const Mat2c& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

inline Mat2q mul(const Mat2q& x, const Mat2q& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

inline bool proj_equal(const std::pair<cplx, cplx>& p, const std::pair<cplx, cplx>& q, long double tol) {
    cplx cross = p.first * q.second - p.second * q.first;
    long double scale = std::max({std::abs(p.first), std::abs(p.second)}) *
                        std::max({std::abs(q.first), std::abs(q.second)});
    return std::abs(cross) <= tol * scale;
}

}  // namespace detail

/// Permutation realized by a matrix on x(E[2]); nullopt if it does not permute the set.
inline std::optional<Perm4> matrix_permutation(const CurveModel& c, const Mat2c& m, long double tol = 1e-9L) {
    auto pts = two_torsion_points(c);
    Perm4 p{};
    std::array<bool, 4> used{};
    for (int i = 0; i < 4; ++i) {
        std::pair<cplx, cplx> img{m.a * pts[i].first + m.b * pts[i].second, m.c * pts[i].first + m.d * pts[i].second};
        int hit = -1;
        for (int j = 0; j < 4; ++j)
            if (detail::proj_equal(img, pts[j], tol)) hit = j;
        if (hit < 0 || used[hit]) return std::nullopt;
        used[hit] = true;
        p[i] = hit;
    }
    return p;
}

/// Builds the automorphism group by closing the generators of the three cases
/// (AB != 0: V4; B = 0: V4 and (1k); A = 0: V4 and a 3-cycle).
inline IsomGroup isom_group(const CurveModel& c) {
    IsomGroup g;
    g.n_E = (c.A != 0 && c.B != 0) ? 2 : (c.B == 0 ? 4 : 6);

    std::vector<IsomElement> gens;
    const Mat2c identity{1, 0, 0, 1};
    auto add_gen = [&](const Mat2c& m, std::optional<Mat2q> ex) {
        auto p = matrix_permutation(c, m);
        if (!p) throw DomainError("isom_group: generator does not permute x(E[2])");
        gens.push_back({*p, detail::normalize(m), ex ? std::optional(detail::normalize(*ex)) : std::nullopt});
    };
    const long double Al = c.A;
    for (int k = 0; k < 3; ++k) {
        cplx q = c.roots[k].value;
        Mat2c m{q, 2.0L * q * q + Al, 1, -q};
        std::optional<Mat2q> ex;
        if (c.roots[k].rational()) {
            mpq_class qq(static_cast<long>(*c.roots[k].exact));
            ex = Mat2q{qq, 2 * qq * qq + c.A, 1, -qq};
        }
        add_gen(m, ex);
    }
    if (c.B == 0) {
        add_gen(Mat2c{0, -Al, 1, 0}, Mat2q{0, mpq_class(-c.A), 1, 0});
    } else if (c.A == 0) {
        // (1 i j) with i, j the first two roots
        cplx qi = c.roots[0].value, qj = c.roots[1].value;
        add_gen(Mat2c{qi, 2.0L * qi * qj, 1, -qj}, std::nullopt);
    }

    g.elements.push_back({Perm4{0, 1, 2, 3}, identity, Mat2q{1, 0, 0, 1}});
    for (std::size_t idx = 0; idx < g.elements.size(); ++idx) {
        for (const auto& gen : gens) {
            IsomElement cur = g.elements[idx];
            Perm4 p{};
            for (int i = 0; i < 4; ++i) p[i] = gen.perm[cur.perm[i]];
            if (g.find(p)) continue;
            Mat2c m = detail::normalize(detail::mul(gen.matrix, cur.matrix));
            std::optional<Mat2q> ex;
            if (gen.exact && cur.exact) ex = detail::normalize(detail::mul(*gen.exact, *cur.exact));
            g.elements.push_back({p, m, ex});
        }
    }
    return g;
}

}  // namespace twistcount
