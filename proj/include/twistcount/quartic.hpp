#pragma once

// The surface a t1 F~(x1,t1) = b t2 F~(x2,t2), a = (y2 z2)^2, b = (y1 z1)^2, in P^3 with
// coordinates ordered (x1, t1, x2, t2).

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <climits>
#include <complex>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "twistcount/curve.hpp"
#include "twistcount/error.hpp"
#include "twistcount/heights.hpp"

namespace twistcount {

struct QuarticSurface {
    CurveModel curve;
    std::int64_t y1 = 1, y2 = 1, z1 = 1, z2 = 1;

    mpz_class a() const { return mpz_class(y2 * z2) * (y2 * z2); }
    mpz_class b() const { return mpz_class(y1 * z1) * (y1 * z1); }
};

inline QuarticSurface make_surface(const CurveModel& c, std::int64_t y1, std::int64_t y2, std::int64_t z1,
                                   std::int64_t z2) {
    if (y1 < 1 || y2 < 1 || z1 < 1 || z2 < 1) throw PreconditionError("make_surface: parameters must be positive");
    // smoothness follows from Delta != 0, which build_curve already enforces
    return QuarticSurface{c, y1, y2, z1, z2};
}

/// Phi(x, t) = t F~(x, t)
inline mpz_class binary_quartic(const CurveModel& c, const mpz_class& x, const mpz_class& t) { return t * f_tilde(c, x, t); }

inline mpq_class binary_quartic(const CurveModel& c, const mpq_class& x, const mpq_class& t) {
    mpq_class t2 = t * t;
    return t * (x * x * x + c.A * x * t2 + c.B * t2 * t);
}

inline cplx binary_quartic(const CurveModel& c, cplx x, cplx t) {
    const long double A = c.A, B = c.B;
    return t * (x * x * x + A * x * t * t + B * t * t * t);
}

struct SurfaceLine {
    enum class Kind { Product, Graph };
    Kind kind = Kind::Product;
    // product-type: indices into x(E[2]) (0 = infinity, k = root q_{k+1})
    int r1 = 0, r2 = 0;
    // graph-type: (x2:t2) = c * gamma (x1:t1)
    Perm4 perm{0, 1, 2, 3};
    int root_index = 0;  // which of the four c with c^4 = a / (b kappa)
    cplx c{1};
    std::optional<mpq_class> c_exact;
    // spanning points in P^3, coordinates (x1, t1, x2, t2)
    std::array<cplx, 4> p, q;
    bool rational = false;
};

namespace detail {

inline std::array<cplx, 4> span_point(const SurfaceLine& L, const Mat2c& g, cplx lam, cplx mu) {
    return {lam, mu, L.c * (g.a * lam + g.b * mu), L.c * (g.c * lam + g.d * mu)};
}

/// kappa with Phi(gamma v) = kappa Phi(v); exact for rational gamma.
inline std::optional<mpq_class> kappa_exact(const CurveModel& c, const Mat2q& g) {
    for (long r = 2; r < 100; ++r) {
        mpq_class x(r), t(1);
        mpq_class base = binary_quartic(c, x, t);
        if (base == 0) continue;
        return binary_quartic(c, g.a * x + g.b * t, g.c * x + g.d * t) / base;
    }
    return std::nullopt;
}

inline cplx kappa_numeric(const CurveModel& c, const Mat2c& g) {
    cplx x(0.731L, 0.219L), t(1.0L, -0.377L);
    return binary_quartic(c, g.a * x + g.b * t, g.c * x + g.d * t) / binary_quartic(c, x, t);
}

/// Rational r with r^4 = v, if any.
inline std::optional<mpq_class> rational_fourth_root(const mpq_class& v) {
    if (v <= 0) return std::nullopt;
    mpz_class n, d;
    if (!mpz_root(n.get_mpz_t(), v.get_num_mpz_t(), 4)) return std::nullopt;
    if (!mpz_root(d.get_mpz_t(), v.get_den_mpz_t(), 4)) return std::nullopt;
    mpq_class r(n, d);
    r.canonicalize();
    return r;
}

}  // namespace detail

/// The corollary's criterion: product-type with both roots rational, or graph-type over a
/// translation by a rational 2-torsion point.
inline bool corollary_rational_type(const CurveModel& c, const SurfaceLine& L) {
    auto rational_idx = [&](int i) { return i == 0 || c.roots[i - 1].rational(); };
    if (L.kind == SurfaceLine::Kind::Product) return rational_idx(L.r1) && rational_idx(L.r2);
    const Perm4& p = L.perm;
    if (p == Perm4{0, 1, 2, 3}) return true;
    // V4 element (1k)(ij): an involution without fixed points
    bool v4 = true;
    for (int i = 0; i < 4; ++i) v4 = v4 && p[p[i]] == i && p[i] != i;
    return v4 && rational_idx(p[0]);
}

/// Lines of the surface: 16 product-type and 4 graph-type lines per automorphism of x(E[2]).
inline std::vector<SurfaceLine> lines(const QuarticSurface& S) {
    const auto& c = S.curve;
    std::vector<SurfaceLine> out;
    auto pts = two_torsion_points(c);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            SurfaceLine L;
            L.kind = SurfaceLine::Kind::Product;
            L.r1 = i;
            L.r2 = j;
            L.p = {pts[i].first, pts[i].second, 0, 0};
            L.q = {0, 0, pts[j].first, pts[j].second};
            out.push_back(L);
        }
    const mpq_class ratio(S.a(), S.b());
    auto G = isom_group(c);
    for (const auto& e : G.elements) {
        cplx kappa = detail::kappa_numeric(c, e.matrix);
        std::optional<mpq_class> kq;
        if (e.exact) kq = detail::kappa_exact(c, *e.exact);
        cplx rho = cplx(ratio.get_d()) / kappa;
        // principal fourth root, then the four choices
        cplx c0 = std::pow(rho, 0.25L);
        for (int m = 0; m < 4; ++m) {
            SurfaceLine L;
            L.kind = SurfaceLine::Kind::Graph;
            L.perm = e.perm;
            L.root_index = m;
            L.c = c0 * std::pow(cplx(0, 1), m);
            if (kq) {
                auto r = detail::rational_fourth_root(ratio / *kq);
                if (r) {
                    // the rational choices are +-r; match them to the numeric branch
                    for (mpq_class cand : {*r, mpq_class(-*r)})
                        if (std::abs(L.c - cplx(cand.get_d())) < 1e-9L * (1 + std::abs(L.c))) L.c_exact = cand;
                }
            }
            L.p = detail::span_point(L, e.matrix, 1, 0);
            L.q = detail::span_point(L, e.matrix, 0, 1);
            out.push_back(L);
        }
    }
    for (auto& L : out) L.rational = corollary_rational_type(c, L) && (L.kind == SurfaceLine::Kind::Product || L.c_exact);
    return out;
}

inline bool classify_rational(const QuarticSurface& S, const SurfaceLine& L) {
    return corollary_rational_type(S.curve, L) && (L.kind == SurfaceLine::Kind::Product || L.c_exact.has_value());
}

/// Surface equation at a complex point, scaled by the magnitude of the terms.
inline long double surface_residual(const QuarticSurface& S, const std::array<cplx, 4>& v) {
    cplx lhs = cplx(S.a().get_d()) * binary_quartic(S.curve, v[0], v[1]);
    cplx rhs = cplx(S.b().get_d()) * binary_quartic(S.curve, v[2], v[3]);
    long double scale = std::abs(lhs) + std::abs(rhs) + 1e-300L;
    long double n = 0;
    for (auto z : v) n = std::max(n, static_cast<long double>(std::abs(z)));
    return std::abs(lhs - rhs) / std::max(scale, S.a().get_d() * std::pow(n, 4.0L));
}

/// The line lies on the surface: the restriction, a binary quartic in (lam, mu), vanishes at 5 points.
inline bool line_on_surface(const QuarticSurface& S, const SurfaceLine& L, long double tol = 1e-9L) {
    const std::array<std::pair<long double, long double>, 5> samples{
        {{1, 0}, {0, 1}, {1, 1}, {1, -2}, {3, 1}}};
    for (auto [l, m] : samples) {
        std::array<cplx, 4> v;
        for (int i = 0; i < 4; ++i) v[i] = l * L.p[i] + m * L.q[i];
        if (surface_residual(S, v) > tol) return false;
    }
    return true;
}

namespace detail {

/// Closest fraction with denominator <= maxden (continued fractions).
inline std::optional<mpq_class> recognize_rational(long double v, long maxden = 100000) {
    if (!std::isfinite(v)) return std::nullopt;
    long double x = v;
    long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    for (int it = 0; it < 40; ++it) {
        long double a = std::floor(x);
        if (std::fabs(a) > 1e15L) break;
        long ai = static_cast<long>(a);
        long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > maxden) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (std::fabs(v - static_cast<long double>(h1) / k1) < 1e-13L * (1 + std::fabs(v))) {
            mpq_class r(h1, k1);
            r.canonicalize();
            return r;
        }
        long double frac = x - a;
        if (frac < 1e-18L) break;
        x = 1 / frac;
    }
    return std::nullopt;
}

}  // namespace detail

/// Independent check: bring two points of the line to reduced row echelon form, recognize
/// the entries as small rationals, then verify exactly that the rational line lies on the surface.
inline bool rational_by_integer_scaling(const QuarticSurface& S, const SurfaceLine& L) {
    // two generic points on the line
    std::array<cplx, 4> u, w;
    for (int i = 0; i < 4; ++i) {
        u[i] = 2.0L * L.p[i] + 1.0L * L.q[i];
        w[i] = -1.0L * L.p[i] + 3.0L * L.q[i];
    }
    std::array<std::array<cplx, 4>, 2> M{u, w};
    // Gaussian elimination with partial pivoting
    int row = 0;
    std::array<int, 2> pivcol{-1, -1};
    for (int col = 0; col < 4 && row < 2; ++col) {
        int best = row;
        for (int r = row; r < 2; ++r)
            if (std::abs(M[r][col]) > std::abs(M[best][col])) best = r;
        if (std::abs(M[best][col]) < 1e-12L) continue;
        std::swap(M[row], M[best]);
        cplx piv = M[row][col];
        for (auto& v : M[row]) v /= piv;
        for (int r = 0; r < 2; ++r)
            if (r != row) {
                cplx f = M[r][col];
                for (int k = 0; k < 4; ++k) M[r][k] -= f * M[row][k];
            }
        pivcol[row] = col;
        ++row;
    }
    if (row < 2) return false;
    std::array<std::array<mpq_class, 4>, 2> R;
    for (int r = 0; r < 2; ++r)
        for (int k = 0; k < 4; ++k) {
            if (std::fabs(M[r][k].imag()) > 1e-10L * (1 + std::abs(M[r][k]))) return false;
            auto q = detail::recognize_rational(M[r][k].real());
            if (!q) return false;
            R[r][k] = *q;
        }
    const std::array<std::pair<long, long>, 5> samples{{{1, 0}, {0, 1}, {1, 1}, {1, -2}, {3, 1}}};
    for (auto [l, m] : samples) {
        std::array<mpq_class, 4> v;
        for (int k = 0; k < 4; ++k) v[k] = l * R[0][k] + m * R[1][k];
        mpq_class lhs = mpq_class(S.a()) * binary_quartic(S.curve, v[0], v[1]);
        mpq_class rhs = mpq_class(S.b()) * binary_quartic(S.curve, v[2], v[3]);
        if (lhs != rhs) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// 2-torsion orbits on P^1

using ProjPair = std::pair<mpz_class, mpz_class>;

inline bool in_two_torsion(const CurveModel& c, const mpz_class& x, const mpz_class& t) {
    if (x == 0 && t == 0) throw PreconditionError("(0:0) is not a point of P^1");
    if (t == 0) return true;
    return f_tilde(c, x, t) == 0;
}

/// Rational members of {P + Q : Q in E[2]} on x-coordinates; size 1, 2 or 4.
inline std::vector<ProjPair> torsion_orbit(const CurveModel& c, const mpz_class& x, const mpz_class& t) {
    if (in_two_torsion(c, x, t)) throw DomainError("torsion_orbit: point lies in x(E[2])");
    std::set<ProjPair> s;
    mpz_class a = x, b = t;
    normalize_pair(a, b);
    s.insert({a, b});
    for (int k = 2; k <= 4; ++k)
        if (c.roots[k - 2].rational()) s.insert(translate_x_by_torsion(c, k, a, b));
    return {s.begin(), s.end()};
}

inline bool torsion_equivalent(const CurveModel& c, const ProjPair& u, const ProjPair& v) {
    auto orb = torsion_orbit(c, u.first, u.second);
    mpz_class a = v.first, b = v.second;
    normalize_pair(a, b);
    return std::find(orb.begin(), orb.end(), ProjPair{a, b}) != orb.end();
}

// ---------------------------------------------------------------------------
// Point census

struct CensusPoint {
    std::array<std::int64_t, 4> v;  // (x1, t1, x2, t2)
    bool on_line = false;           // on some line of the surface
    bool on_rational_line = false;  // on a line defined over Q
    bool qline = false;
};

struct CensusResult {
    std::int64_t H = 0;
    std::uint64_t on_line_points = 0;  // on a rational line
    std::uint64_t irrational_line_points = 0;  // on a line, but only on irrational ones
    std::uint64_t off_line_points = 0;
    std::uint64_t qlines_points = 0;
    std::vector<CensusPoint> off_line;  // the off-line points themselves
    std::vector<CensusPoint> qlines;
    std::uint64_t zero_locus_points = 0;  // points with Phi(v1) = Phi(v2) = 0 (all on product lines)
};

namespace detail {

struct HashEntry {
    nt::i128 value;
    std::int64_t x, t;
    bool operator<(const HashEntry& o) const {
        if (value != o.value) return value < o.value;
        if (x != o.x) return x < o.x;
        return t < o.t;
    }
};

inline nt::i128 phi_i128(const CurveModel& c, nt::i128 x, nt::i128 t) { return t * f_tilde_i128(c, x, t); }

}  // namespace detail

/// Primitive points of P^3 on the surface with all |coordinates| <= H, classified against the lines.
inline CensusResult census(const QuarticSurface& S, std::int64_t H, unsigned workers = 1) {
    if (H < 1) throw PreconditionError("census: H must be >= 1");
    if (H > 1000) throw ResourceError("census: H > 10^3 exceeds the cost guard");
    const auto& c = S.curve;
    const nt::i128 a = static_cast<nt::i128>(S.a().get_si()), b = static_cast<nt::i128>(S.b().get_si());
    CensusResult res;
    res.H = H;

    // canonical representatives v != 0 of P^1 up to sign: t > 0, or t = 0 and x > 0
    std::vector<detail::HashEntry> L1, L2;
    std::vector<std::pair<std::int64_t, std::int64_t>> Z;  // zeros of Phi, plus (0, 0)
    Z.push_back({0, 0});
    for (std::int64_t t = 0; t <= H; ++t)
        for (std::int64_t x = -H; x <= H; ++x) {
            if (t == 0 && x <= 0) continue;
            nt::i128 ph = detail::phi_i128(c, x, t);
            if (ph == 0) {
                Z.push_back({x, t});
                continue;
            }
            L1.push_back({a * ph, x, t});
            L2.push_back({b * ph, x, t});
        }
    std::sort(L1.begin(), L1.end());
    std::sort(L2.begin(), L2.end());

    // zero locus: (v1, v2) with both Phi = 0, not both zero; all lie on product lines
    for (std::size_t i = 0; i < Z.size(); ++i)
        for (std::size_t j = 0; j < Z.size(); ++j) {
            if (i == 0 && j == 0) continue;
            auto [x1, t1] = Z[i];
            auto [x2, t2] = Z[j];
            std::int64_t g = std::gcd(std::gcd(x1, t1), std::gcd(x2, t2));
            if (g != 1) continue;
            // (v1, v2) and (v1, -v2) are distinct points unless one half vanishes
            res.zero_locus_points += (i == 0 || j == 0) ? 1 : 2;
        }
    res.on_line_points += res.zero_locus_points;

    auto G = isom_group(c);
    // returns 0 = no line, 1 = only irrational lines, 2 = a rational line
    auto graph_line_class = [&](std::int64_t x1, std::int64_t t1, std::int64_t x2, std::int64_t t2) {
        int cls = 0;
        for (const auto& e : G.elements) {
            if (e.exact) {
                mpq_class u = e.exact->a * x1 + e.exact->b * t1, w = e.exact->c * x1 + e.exact->d * t1;
                // a rational point over a rational gamma fixes a rational scalar c
                if (u * t2 == w * x2) return 2;
            } else {
                cplx u = e.matrix.a * cplx(x1) + e.matrix.b * cplx(t1), w = e.matrix.c * cplx(x1) + e.matrix.d * cplx(t1);
                long double scale = std::max(std::abs(u), std::abs(w)) *
                                    std::max(std::fabs((long double)x2), std::fabs((long double)t2));
                if (std::abs(u * cplx(t2) - w * cplx(x2)) <= 1e-9L * scale) cls = 1;
            }
        }
        return cls;
    };

    // chunk boundaries fall between distinct values so each group is handled by one worker
    unsigned nw = std::max(1u, workers);
    std::vector<std::size_t> cuts{0};
    for (unsigned k = 1; k < nw; ++k) {
        std::size_t pos = L1.size() * k / nw;
        while (pos < L1.size() && pos > 0 && L1[pos].value == L1[pos - 1].value) ++pos;
        cuts.push_back(std::max(pos, cuts.back()));
    }
    cuts.push_back(L1.size());
    std::vector<CensusResult> part(nw);
    auto join = [&](unsigned w) {
        CensusResult& r = part[w];
        std::size_t i = cuts[w], iend = cuts[w + 1];
        if (i >= iend) return;
        std::size_t j = std::lower_bound(L2.begin(), L2.end(), detail::HashEntry{L1[i].value, INT64_MIN, INT64_MIN}) - L2.begin();
        while (i < iend && j < L2.size()) {
            if (L1[i].value < L2[j].value) {
                ++i;
                continue;
            }
            if (L2[j].value < L1[i].value) {
                ++j;
                continue;
            }
            nt::i128 v = L1[i].value;
            std::size_t i2 = i, j2 = j;
            while (i2 < iend && L1[i2].value == v) ++i2;
            while (j2 < L2.size() && L2[j2].value == v) ++j2;
            for (std::size_t p = i; p < i2; ++p)
                for (std::size_t q = j; q < j2; ++q)
                    for (int s : {1, -1}) {
                        std::int64_t x1 = L1[p].x, t1 = L1[p].t, x2 = s * L2[q].x, t2 = s * L2[q].t;
                        if (std::gcd(std::gcd(x1, t1), std::gcd(x2, t2)) != 1) continue;
                        CensusPoint pt{{x1, t1, x2, t2}, false, false, false};
                        int cls = graph_line_class(x1, t1, x2, t2);
                        pt.on_line = cls > 0;
                        pt.on_rational_line = cls == 2;
                        if (cls == 2)
                            ++r.on_line_points;
                        else if (cls == 1)
                            ++r.irrational_line_points;
                        else
                            ++r.off_line_points;
                        if (pt.on_line) {
                            // both halves lie outside x(E[2]) here since Phi != 0
                            pt.qline = !torsion_equivalent(c, {x1, t1}, {x2, t2});
                            if (pt.qline) {
                                ++r.qlines_points;
                                r.qlines.push_back(pt);
                            }
                        } else {
                            r.off_line.push_back(pt);
                        }
                    }
            i = i2;
            j = j2;
        }
    };
    if (nw == 1) {
        join(0);
    } else {
        std::vector<std::thread> th;
        for (unsigned w = 0; w < nw; ++w) th.emplace_back(join, w);
        for (auto& t : th) t.join();
    }
    for (auto& r : part) {
        res.on_line_points += r.on_line_points;
        res.irrational_line_points += r.irrational_line_points;
        res.off_line_points += r.off_line_points;
        res.qlines_points += r.qlines_points;
        res.off_line.insert(res.off_line.end(), r.off_line.begin(), r.off_line.end());
        res.qlines.insert(res.qlines.end(), r.qlines.begin(), r.qlines.end());
    }
    return res;
}

inline void write_census(std::ostream& os, const QuarticSurface& S, const CensusResult& r) {
    os << "# curve A=" << S.curve.A << " B=" << S.curve.B << "\n";
    os << "# surface y1=" << S.y1 << " y2=" << S.y2 << " z1=" << S.z1 << " z2=" << S.z2 << " H=" << r.H << "\n";
    os << "# on_line=" << r.on_line_points << " irrational_line=" << r.irrational_line_points << " off_line=" << r.off_line_points << " qlines=" << r.qlines_points << "\n";
    os << "# x1 t1 x2 t2 class\n";
    for (const auto& p : r.off_line) os << p.v[0] << ' ' << p.v[1] << ' ' << p.v[2] << ' ' << p.v[3] << " off\n";
    for (const auto& p : r.qlines) os << p.v[0] << ' ' << p.v[1] << ' ' << p.v[2] << ' ' << p.v[3] << " qline\n";
}

}  // namespace twistcount
