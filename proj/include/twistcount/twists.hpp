#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "twistcount/arith.hpp"
#include "twistcount/curve.hpp"
#include "twistcount/error.hpp"
#include "twistcount/heights.hpp"

namespace twistcount {

/// A point on E_d, d = d0 d1, written as d0 y^2 = F~(x, d1 z^2).
struct TwistPoint {
    std::int64_t d0 = 1, d1 = 1, y = 1, z = 1, x = 0;

    std::int64_t d() const { return d0 * d1; }
    std::int64_t t() const { return d1 * z * z; }
    bool operator==(const TwistPoint& o) const {
        return d0 == o.d0 && d1 == o.d1 && y == o.y && z == o.z && x == o.x;
    }
};

inline bool squarefree(u64 n) {
    if (n == 0) return false;
    for (auto [p, e] : nt::factor_u64(n))
        if (e > 1) return false;
    return true;
}

namespace detail {

inline mpz_class icbrt(const mpz_class& v) {
    mpz_class r;
    mpz_root(r.get_mpz_t(), v.get_mpz_t(), 3);
    return r;
}

inline void check_invariants(const CurveModel& c, const TwistPoint& tp) {
    if (tp.d0 < 1 || tp.d1 < 1 || tp.z < 1 || tp.y == 0) throw DomainError("TwistPoint: sign conditions violated");
    mpz_class d1z = mpz_class(tp.d1) * tp.z;
    if (gcd(mpz_class(tp.x) * tp.y, d1z) != 1) throw DomainError("TwistPoint: gcd(xy, d1 z) != 1");
    if (std::gcd(tp.d0, tp.d1) != 1) throw DomainError("TwistPoint: gcd(d0, d1) != 1");
    if (mpz_class(tp.d0) * tp.y * tp.y != f_tilde(c, tp.x, mpz_class(tp.d1) * tp.z * tp.z))
        throw DomainError("TwistPoint: d0 y^2 != F~(x, d1 z^2)");
}

}  // namespace detail

/// Unique (d0, d1, y, z, x) for a point (x0 : y : z0) on E_d with z0 >= 1, y != 0.
inline TwistPoint decompose(const CurveModel& c, std::int64_t d, const ProjPoint& P) {
    if (d < 1 || !squarefree(static_cast<u64>(d))) throw PreconditionError("decompose: d must be squarefree positive");
    if (P.z < 1 || P.y == 0) throw PreconditionError("decompose: need z0 >= 1 and y != 0");
    if (gcd(gcd(P.x, P.y), P.z) != 1) throw PreconditionError("decompose: gcd(x0, y, z0) != 1");
    if (!on_twist(c, d, P)) throw DomainError("decompose: point is not on E_d");
    mpz_class md(d);
    mpz_class d1 = gcd(md, P.z);
    mpz_class z3 = P.z / (d1 * d1);
    mpz_class z = detail::icbrt(z3);
    if (d1 * d1 * z * z * z != P.z) throw DomainError("decompose: z0 / d1^2 is not a cube");
    mpz_class den = d1 * z;
    if (!mpz_divisible_p(P.x.get_mpz_t(), den.get_mpz_t())) throw DomainError("decompose: d1 z does not divide x0");
    mpz_class x = P.x / den;
    if (!x.fits_slong_p() || !P.y.fits_slong_p() || !z.fits_slong_p())
        throw ResourceError("decompose: coordinates exceed 64 bits");
    TwistPoint tp{d / d1.get_si(), d1.get_si(), P.y.get_si(), z.get_si(), x.get_si()};
    detail::check_invariants(c, tp);
    return tp;
}

/// Inverse of decompose: the projective point (d1 x z : y : d1^2 z^3) on E_{d0 d1}.
inline ProjPoint recompose(const CurveModel& c, const TwistPoint& tp) {
    detail::check_invariants(c, tp);
    mpz_class d1 = tp.d1, z = tp.z;
    return ProjPoint{d1 * tp.x * z, mpz_class(tp.y), d1 * d1 * z * z * z};
}

// ---------------------------------------------------------------------------
// Reports

struct PointRecord {
    ProjPoint P;
    std::int64_t d = 0;
    bool has_twist_point = false;
    TwistPoint tp;
    long double hhat = 0;
    bool torsion = false;
};

struct CountReport {
    std::int64_t X = 0;
    long double alpha = 0;
    HeightGap gap;
    std::int64_t A = 0, B = 0;
    std::map<std::int64_t, std::vector<PointRecord>> per_d;
    std::int64_t N_star = 0;
    std::int64_t N_dagger = 0;
    std::int64_t N = 0;
    /// exp of the minimal canonical height of a nontorsion point found, per d with points;
    /// +inf means no nontorsion point below the search bound (not a rank statement).
    std::map<std::int64_t, long double> eta;
    double seconds = 0;
    std::uint64_t candidates = 0;
};

/// exp h^ <= d^{1/8 + alpha}, ties included (heights carry tolerance tol).
inline bool height_admissible(long double hhat, std::int64_t d, long double alpha, long double tol) {
    return hhat <= (0.125L + alpha) * std::log(static_cast<long double>(d)) + tol;
}

inline long double eta(const std::vector<PointRecord>& points) {
    long double best = std::numeric_limits<long double>::infinity();
    for (const auto& r : points)
        if (!r.torsion) best = std::min(best, std::exp(r.hhat));
    return best;
}

/// eta_d >= c d^{1/8} with c = e^{h1} C0^{-1/8}.
inline long double eta_lower_constant(const CurveModel& c, const HeightGap& gap) {
    return std::exp(gap.h1) * std::pow(c.C0(), -0.125L);
}

namespace detail {

inline bool record_less(const PointRecord& a, const PointRecord& b) {
    if (a.P.x != b.P.x) return a.P.x < b.P.x;
    if (a.P.z != b.P.z) return a.P.z < b.P.z;
    return a.P.y < b.P.y;
}

inline void finalize(CountReport& rep) {
    rep.N_star = rep.N_dagger = rep.N = 0;
    rep.eta.clear();
    for (auto& [d, v] : rep.per_d) {
        std::sort(v.begin(), v.end(), record_less);
        rep.N_dagger += static_cast<std::int64_t>(v.size());
        std::int64_t nt = 0;
        for (const auto& r : v) nt += !r.torsion;
        rep.N_star += nt;
        long double e = eta(v);
        rep.eta[d] = e;
        if (nt > 0) ++rep.N;
    }
}

/// Squarefree flags up to n.
inline std::vector<bool> squarefree_table(std::uint64_t n) {
    std::vector<bool> sf(n + 1, true);
    sf[0] = false;
    for (std::uint64_t p = 2; p * p <= n; ++p)
        for (std::uint64_t q = p * p; q <= n; q += p * p) sf[q] = false;
    return sf;
}

inline bool is_square_i128(i128 v, i128& root) {
    if (v < 0) return false;
    long double r = std::sqrt(static_cast<long double>(v));
    i128 s = static_cast<i128>(r);
    while (s > 0 && s * s > v) --s;
    while ((s + 1) * (s + 1) <= v) ++s;
    root = s;
    return s * s == v;
}

}  // namespace detail

struct EnumerationOptions {
    long double height_tol = 1e-6L;
    unsigned workers = 1;
    std::uint64_t candidate_budget = std::numeric_limits<std::uint64_t>::max();
};

/// Box and range constants for a run: C_j = e^{-2 h_j}, D_j = sqrt(C0) C_j^2.
struct BoxConstants {
    long double C1, D1, beta;
};

inline BoxConstants box_constants(const CurveModel& c, const HeightGap& gap, long double alpha) {
    long double C1 = gap.C(1);
    return {C1, std::sqrt(c.C0()) * C1 * C1, 0.25L + 2 * alpha};
}

/// All points of exp h^ <= d^{1/8+alpha} on E_d, d <= X squarefree, via the (d0, d1, y, z, x)
/// parametrization: loop over y, over t = d1 z^2, and over x = rho t mod y^2 with F(rho) = 0 mod y^2.
inline CountReport enumerate_small_points(const CurveModel& c, std::int64_t X, long double alpha, const HeightGap& gap,
                                          EnumerationOptions opt = {}) {
    if (X < 2) throw PreconditionError("enumerate_small_points: X must be >= 2");
    if (!(alpha > 0)) throw PreconditionError("enumerate_small_points: alpha must be positive");
    auto t0 = std::chrono::steady_clock::now();
    CountReport rep;
    rep.X = X;
    rep.alpha = alpha;
    rep.gap = gap;
    rep.A = c.A;
    rep.B = c.B;

    const auto K = box_constants(c, gap, alpha);
    const long double Xl = static_cast<long double>(X);
    const long double T = K.C1 * std::pow(Xl, K.beta);  // |x|, t <= T
    const long double YZ = K.D1 * std::pow(Xl, 4 * alpha);
    const i64 Tmax = static_cast<i64>(std::floor(T));
    const i64 Ymax = static_cast<i64>(std::floor(YZ));
    if (Tmax > 2'000'000) throw ResourceError("enumerate_small_points: box too large for 128-bit evaluation");
    const auto sf = detail::squarefree_table(static_cast<std::uint64_t>(X));

    // t = d1 z^2 with d1 squarefree
    std::vector<std::pair<i64, i64>> tdec(Tmax + 1, {0, 0});
    for (i64 z = 1; z * z <= Tmax; ++z)
        for (i64 d1 = 1; d1 * z * z <= Tmax; ++d1)
            if (sf.size() > static_cast<std::size_t>(d1) ? sf[d1] : squarefree(d1)) tdec[d1 * z * z] = {d1, z};

    struct Shard {
        std::map<std::int64_t, std::vector<PointRecord>> per_d;
        std::uint64_t candidates = 0;
        bool over_budget = false;
    };
    const unsigned W = std::max(1u, opt.workers);
    std::vector<Shard> shards(W);
    std::vector<std::vector<u64>> root_tables(Ymax + 1);
    for (i64 y = 1; y <= Ymax; ++y) root_tables[y] = roots_mod(c, factorize(static_cast<u64>(y * y)));

    auto work = [&](unsigned w) {
        Shard& sh = shards[w];
        for (i64 t = 1 + w; t <= Tmax; t += W) {
            auto [d1, z] = tdec[t];
            if (d1 == 0) continue;
            for (i64 y = 1; y * z <= Ymax; ++y) {
                if (std::gcd(y, t) != 1) continue;
                const i64 y2 = y * y;
                const auto& roots = root_tables[y];
                for (u64 rho : roots) {
                    // x = rho t mod y^2, |x| <= T
                    i64 r = static_cast<i64>(static_cast<u128>(rho) * static_cast<u64>(t) % static_cast<u64>(y2));
                    i64 x = r - ((r + Tmax) / y2) * y2;
                    for (; x <= Tmax; x += y2) {
                        if (++sh.candidates > opt.candidate_budget / W) {
                            sh.over_budget = true;
                            return;
                        }
                        if (std::gcd(x, t) != 1) continue;
                        i128 f = f_tilde_i128(c, x, t);
                        if (f <= 0) continue;
                        i128 d0 = f / y2;
                        if (d0 * d1 > X) continue;
                        i64 d = static_cast<i64>(d0) * d1;
                        if (!sf[d]) continue;
                        long double bound = K.C1 * std::pow(static_cast<long double>(d), K.beta);
                        if (static_cast<long double>(std::abs(x)) > bound || static_cast<long double>(t) > bound) continue;
                        TwistPoint tp{static_cast<i64>(d0), d1, y, z, x};
                        ProjPoint P = recompose(c, tp);
                        long double h = canonical_height(c, P, opt.height_tol);
                        if (!height_admissible(h, d, alpha, opt.height_tol)) continue;
                        bool tors = is_torsion(c, d, P);
                        for (int s : {1, -1}) {
                            PointRecord rec;
                            rec.d = d;
                            rec.tp = tp;
                            rec.tp.y = s * y;
                            rec.has_twist_point = true;
                            rec.P = ProjPoint{P.x, s * P.y, P.z};
                            rec.hhat = h;
                            rec.torsion = tors;
                            sh.per_d[d].push_back(rec);
                        }
                    }
                }
            }
        }
    };
    if (W == 1) {
        work(0);
    } else {
        std::vector<std::thread> ts;
        for (unsigned w = 0; w < W; ++w) ts.emplace_back(work, w);
        for (auto& th : ts) th.join();
    }
    bool over = false;
    for (auto& sh : shards) {
        rep.candidates += sh.candidates;
        over = over || sh.over_budget;
        for (auto& [d, v] : sh.per_d) {
            auto& dst = rep.per_d[d];
            dst.insert(dst.end(), v.begin(), v.end());
        }
    }
    detail::finalize(rep);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (over) {
        std::ostringstream os;
        os << "candidate budget " << opt.candidate_budget << " exhausted; completed d-range: none (partial: "
           << rep.per_d.size() << " twists, N_star so far " << rep.N_star << ")";
        throw BudgetError(os.str(), os.str());
    }
    return rep;
}

/// Oracle: for each squarefree d <= X, scan reduced x-coordinates a/w in the naive box and keep
/// those with d w F~(a, w) a nonzero square.
inline CountReport brute_force_count(const CurveModel& c, std::int64_t X, long double alpha, const HeightGap& gap,
                                     long double height_tol = 1e-6L) {
    if (X > 10000) throw ResourceError("brute_force_count: X > 10^4 exceeds the cost guard");
    if (X < 2) throw PreconditionError("brute_force_count: X must be >= 2");
    auto t0 = std::chrono::steady_clock::now();
    CountReport rep;
    rep.X = X;
    rep.alpha = alpha;
    rep.gap = gap;
    rep.A = c.A;
    rep.B = c.B;
    const long double C1 = gap.C(1), beta = 0.25L + 2 * alpha;
    for (i64 d = 1; d <= X; ++d) {
        if (!squarefree(static_cast<u64>(d))) continue;
        i64 bound = static_cast<i64>(std::floor(C1 * std::pow(static_cast<long double>(d), beta)));
        for (i64 w = 1; w <= bound; ++w)
            for (i64 a = -bound; a <= bound; ++a) {
                ++rep.candidates;
                if (std::gcd(a, w) != 1) continue;
                i128 s = static_cast<i128>(d) * w * f_tilde_i128(c, a, w);
                i128 k;
                if (s <= 0 || !detail::is_square_i128(s, k)) continue;
                // affine point (a/w, k/(d w^2))
                AffinePoint Q{false, mpq_class(mpz_class(static_cast<long>(a)), mpz_class(static_cast<long>(w))),
                              mpq_class(mpz_class(static_cast<long>(k)), mpz_class(static_cast<long>(d)) * w * w)};
                Q.X.canonicalize();
                Q.Y.canonicalize();
                ProjPoint P = to_proj(Q);
                long double h = canonical_height(c, P, height_tol);
                if (!height_admissible(h, d, alpha, height_tol)) continue;
                bool tors = is_torsion(c, d, P);
                for (int sgn_y : {1, -1}) {
                    PointRecord rec;
                    rec.d = d;
                    rec.P = ProjPoint{P.x, sgn_y * P.y, P.z};
                    rec.hhat = h;
                    rec.torsion = tors;
                    rep.per_d[d].push_back(rec);
                }
            }
    }
    detail::finalize(rep);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

/// Same point sets, heights (to tol) and counters.
inline bool reports_equal(const CountReport& a, const CountReport& b, long double tol = 1e-9L) {
    if (a.N_star != b.N_star || a.N_dagger != b.N_dagger || a.N != b.N) return false;
    if (a.per_d.size() != b.per_d.size()) return false;
    for (const auto& [d, v] : a.per_d) {
        auto it = b.per_d.find(d);
        if (it == b.per_d.end() || it->second.size() != v.size()) return false;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto &p = v[i], &q = it->second[i];
            if (!(p.P == q.P) || p.torsion != q.torsion || std::fabs(p.hhat - q.hhat) > tol) return false;
        }
    }
    return true;
}

/// Report invariants; returns an empty string when all hold.
inline std::string check_report(const CurveModel& c, const CountReport& r) {
    std::ostringstream err;
    if (2 * c.T2 * r.N > r.N_star) err << "2 T2 N > N_star; ";
    if (r.N_star > r.N_dagger) err << "N_star > N_dagger; ";
    for (const auto& [d, v] : r.per_d) {
        for (const auto& p : v) {
            if (!on_twist(c, d, p.P)) err << "point off E_" << d << "; ";
            if (!height_admissible(p.hhat, d, r.alpha, 1e-6L)) err << "inadmissible height at d=" << d << "; ";
            long double disc = p.hhat - naive_height_x(p.P) / 2;
            if (!r.gap.contains(disc)) err << "gap violated at d=" << d << " " << p.P.str() << "; ";
        }
        // sign pairing
        for (const auto& p : v) {
            ProjPoint m{p.P.x, -p.P.y, p.P.z};
            if (std::none_of(v.begin(), v.end(), [&](const PointRecord& q) { return q.P == m; }))
                err << "unpaired sign at d=" << d << "; ";
        }
        auto e = r.eta.find(d);
        if (e != r.eta.end() && std::isfinite(e->second) &&
            e->second < eta_lower_constant(c, r.gap) * std::pow(static_cast<long double>(d), 0.125L) * (1 - 1e-9L))
            err << "eta lower bound violated at d=" << d << "; ";
    }
    return err.str();
}

// ---------------------------------------------------------------------------
// Extremal family d = z F~(x, z)

struct ExtremalMember {
    std::int64_t d;
    std::int64_t x, z;
    ProjPoint P;  // (x z : 1 : z^2)
};

namespace detail {

/// Real roots of u^3 + A u + b, ascending.
inline std::vector<long double> real_cubic_roots(long double A, long double b) {
    // Sturm-free approach: bracket by the critical points
    std::vector<long double> crit;
    if (A < 0) {
        long double s = std::sqrt(-A / 3);
        crit = {-s, s};
    }
    auto F = [&](long double u) { return u * u * u + A * u + b; };
    long double R = 1 + std::max(std::fabs(A), std::fabs(b));
    std::vector<long double> pts{-R};
    for (auto v : crit) pts.push_back(v);
    pts.push_back(R);
    std::vector<long double> out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        long double lo = pts[i], hi = pts[i + 1];
        long double flo = F(lo), fhi = F(hi);
        if (flo == 0) {
            out.push_back(lo);
            continue;
        }
        if ((flo < 0) == (fhi < 0)) continue;
        for (int it = 0; it < 200 && hi - lo > 0; ++it) {
            long double mid = (lo + hi) / 2;
            if (mid == lo || mid == hi) break;
            if ((F(mid) < 0) == (flo < 0))
                lo = mid;
            else
                hi = mid;
        }
        out.push_back((lo + hi) / 2);
    }
    if (!pts.empty() && F(pts.back()) == 0) out.push_back(pts.back());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

/// All squarefree d = z F~(x, z) <= X with x, z >= 1, with their witness points.
inline std::vector<ExtremalMember> extremal_family(const CurveModel& c, std::int64_t X) {
    if (X < 2) throw PreconditionError("extremal_family: X must be >= 2");
    std::vector<ExtremalMember> out;
    const long double A = c.A, B = c.B;
    const auto roots = detail::real_cubic_roots(A, B);
    long double fmin = std::numeric_limits<long double>::infinity();
    for (auto q : roots) fmin = std::min(fmin, std::fabs(3 * q * q + A));
    // beyond z0 the window {0 < F(u) <= X/z^4} around each root is shorter than 1/z
    const long double z0 = std::cbrt(100.0L * X / fmin) + 1;

    auto consider = [&](i64 x, i64 z) {
        if (x < 1 || std::gcd(x, z) != 1) return;
        i128 f = f_tilde_i128(c, x, z);
        if (f <= 0) return;
        i128 d = f * z;
        if (d > X || !squarefree(static_cast<u64>(d))) return;
        ExtremalMember m;
        m.d = static_cast<i64>(d);
        m.x = x;
        m.z = z;
        m.P = ProjPoint{mpz_class(static_cast<long>(x)) * z, 1, mpz_class(static_cast<long>(z)) * z};
        out.push_back(m);
    };

    for (i64 z = 1; z <= X; ++z) {
        const long double zl = static_cast<long double>(z);
        if (zl > z0) {
            for (auto q : roots) {
                i64 c0 = static_cast<i64>(std::llround(q * zl));
                for (i64 x = c0 - 2; x <= c0 + 2; ++x) consider(x, z);
            }
            continue;
        }
        long double cap = static_cast<long double>(X) / (zl * zl * zl * zl);
        auto r1 = detail::real_cubic_roots(A, B - cap);
        std::vector<long double> br(roots);
        br.insert(br.end(), r1.begin(), r1.end());
        std::sort(br.begin(), br.end());
        i64 last = 0;
        for (std::size_t i = 0; i + 1 < br.size(); ++i) {
            long double mid = (br[i] + br[i + 1]) / 2;
            long double fm = mid * mid * mid + A * mid + B;
            if (!(fm > 0 && fm <= cap)) continue;
            i64 lo = std::max<i64>(static_cast<i64>(std::floor(br[i] * zl)) - 2, last + 1);
            i64 hi = static_cast<i64>(std::ceil(br[i + 1] * zl)) + 2;
            for (i64 x = lo; x <= hi; ++x) consider(x, z);
            last = std::max(last, hi);
        }
    }
    std::sort(out.begin(), out.end(), [](const ExtremalMember& a, const ExtremalMember& b) {
        return a.d != b.d ? a.d < b.d : (a.z != b.z ? a.z < b.z : a.x < b.x);
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const ExtremalMember& a, const ExtremalMember& b) { return a.d == b.d && a.x == b.x && a.z == b.z; }),
              out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Line-oriented serialization

inline void write_report(std::ostream& os, const CountReport& r) {
    os.precision(17);
    os << "# curve A=" << r.A << " B=" << r.B << "\n";
    os << "# X=" << r.X << " alpha=" << static_cast<double>(r.alpha) << "\n";
    os << "# gap h1=" << static_cast<double>(r.gap.h1) << " h2=" << static_cast<double>(r.gap.h2)
       << " source=" << to_string(r.gap.source) << "\n";
    os << "# N=" << r.N << " N_star=" << r.N_star << " N_dagger=" << r.N_dagger << "\n";
    os << "# d d0 d1 y z x x0 y0 z0 hhat torsion\n";
    for (const auto& [d, v] : r.per_d)
        for (const auto& p : v) {
            os << d << ' ';
            if (p.has_twist_point)
                os << p.tp.d0 << ' ' << p.tp.d1 << ' ' << p.tp.y << ' ' << p.tp.z << ' ' << p.tp.x;
            else
                os << "- - - - -";
            os << ' ' << p.P.x << ' ' << p.P.y << ' ' << p.P.z << ' ' << static_cast<double>(p.hhat) << ' '
               << (p.torsion ? 1 : 0) << "\n";
        }
}

inline CountReport read_report(std::istream& is) {
    CountReport r;
    std::string line;
    auto field = [](const std::string& s, const std::string& key) -> std::string {
        auto pos = s.find(key + "=");
        if (pos == std::string::npos) throw PreconditionError("read_report: missing " + key);
        pos += key.size() + 1;
        auto end = s.find(' ', pos);
        return s.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    };
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# curve", 0) == 0) {
                r.A = std::stoll(field(line, "A"));
                r.B = std::stoll(field(line, "B"));
            } else if (line.rfind("# X=", 0) == 0) {
                r.X = std::stoll(field(line, "X"));
                r.alpha = std::stold(field(line, "alpha"));
            } else if (line.rfind("# gap", 0) == 0) {
                r.gap.h1 = std::stold(field(line, "h1"));
                r.gap.h2 = std::stold(field(line, "h2"));
                r.gap.source = field(line, "source") == "explicit-bound" ? HeightGap::Source::ExplicitBound
                                                                          : HeightGap::Source::EmpiricalCalibration;
            }
            continue;
        }
        std::istringstream ls(line);
        PointRecord p;
        std::string d0;
        ls >> p.d >> d0;
        if (d0 != "-") {
            p.has_twist_point = true;
            p.tp.d0 = std::stoll(d0);
            ls >> p.tp.d1 >> p.tp.y >> p.tp.z >> p.tp.x;
        } else {
            std::string skip;
            for (int i = 0; i < 4; ++i) ls >> skip;
        }
        std::string x0, y0, z0;
        int tors = 0;
        double h = 0;
        ls >> x0 >> y0 >> z0 >> h >> tors;
        if (!ls) throw PreconditionError("read_report: malformed record: " + line);
        p.P = ProjPoint{mpz_class(x0), mpz_class(y0), mpz_class(z0)};
        p.hhat = h;
        p.torsion = tors != 0;
        r.per_d[p.d].push_back(p);
    }
    detail::finalize(r);
    return r;
}

}  // namespace twistcount
