#pragma once

// Summatory functions, Euler-product constants, the region function G and the volume Omega.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "twistcount/arith.hpp"
#include "twistcount/curve.hpp"
#include "twistcount/error.hpp"
#include "twistcount/twists.hpp"

namespace twistcount {

// ---------------------------------------------------------------------------
// Fitting X^sigma Q(log X)

struct FitResult {
    std::vector<std::int64_t> X_grid;
    std::vector<long double> values;
    long double sigma = 1;
    int m = 0;
    long double leading_coeff = 0;
    /// max relative deviation from leading_coeff X^sigma (log X)^m over the upper half of the grid
    long double residual = 0;
    /// Q(L) = sum coeffs[j] L^j, lowest degree first; a single entry for the leading-only fit
    std::vector<long double> coeffs;
    /// max relative deviation from X^sigma Q(log X) over the upper half of the grid
    long double model_residual = 0;
};

inline long double fit_model(const FitResult& f, long double X) {
    long double L = std::log(X), q = 0;
    if (f.coeffs.size() == 1) return f.leading_coeff * std::pow(X, f.sigma) * std::pow(L, f.m);
    for (std::size_t j = f.coeffs.size(); j-- > 0;) q = q * L + f.coeffs[j];
    return std::pow(X, f.sigma) * q;
}

/// Least squares for values / X^sigma = Q(log X) with deg Q = m, relative weights. With fewer
/// than m + 1 points the leading coefficient is read off the largest grid point.
inline FitResult fit_growth(std::vector<std::int64_t> grid, std::vector<long double> values, long double sigma, int m) {
    if (grid.empty() || grid.size() != values.size()) throw PreconditionError("fit_growth: empty or mismatched grid");
    FitResult f;
    f.X_grid = std::move(grid);
    f.values = std::move(values);
    f.sigma = sigma;
    f.m = m;
    const std::size_t n = f.X_grid.size();
    if (n < static_cast<std::size_t>(m) + 1 || n == 1) {
        long double X = f.X_grid.back();
        f.leading_coeff = f.values.back() / (std::pow(X, sigma) * std::pow(std::log(X), m));
        f.coeffs = {f.leading_coeff};
    } else {
        Eigen::MatrixXd M(n, m + 1);
        Eigen::VectorXd rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            long double X = f.X_grid[i], L = std::log(X);
            long double y = f.values[i] / std::pow(X, sigma);
            long double w = y != 0 ? 1 / std::fabs(y) : 1;
            long double Lj = 1;
            for (int j = 0; j <= m; ++j, Lj *= L) M(i, j) = static_cast<double>(w * Lj);
            rhs(i) = static_cast<double>(w * y);
        }
        Eigen::VectorXd sol = M.colPivHouseholderQr().solve(rhs);
        f.coeffs.resize(m + 1);
        for (int j = 0; j <= m; ++j) f.coeffs[j] = sol(j);
        f.leading_coeff = f.coeffs[m];
    }
    for (std::size_t i = n / 2; i < n; ++i) {
        long double X = f.X_grid[i], v = f.values[i];
        if (v == 0) continue;
        long double lead = f.leading_coeff * std::pow(X, sigma) * std::pow(std::log(X), m);
        f.residual = std::max(f.residual, std::fabs(v - lead) / std::fabs(v));
        f.model_residual = std::max(f.model_residual, std::fabs(v - fit_model(f, X)) / std::fabs(v));
    }
    if (n == 1) f.residual = f.model_residual = 0;
    return f;
}

/// Geometric grid start, start*factor, ... <= stop.
inline std::vector<std::int64_t> geometric_grid(long double start, long double stop, long double factor) {
    if (start < 1 || stop < start || factor <= 1) throw PreconditionError("geometric_grid: need 1 <= start <= stop, factor > 1");
    std::vector<std::int64_t> g;
    for (long double x = start; x <= stop * (1 + 1e-12L); x *= factor) {
        auto v = static_cast<std::int64_t>(std::llround(x));
        if (g.empty() || v > g.back()) g.push_back(v);
    }
    return g;
}

namespace detail {

inline void check_grid(const std::vector<std::int64_t>& grid, std::int64_t max) {
    if (grid.empty()) throw PreconditionError("empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 2) throw PreconditionError("grid points must be >= 2");
        if (i && grid[i] <= grid[i - 1]) throw PreconditionError("grid must be increasing");
    }
    if (grid.back() > max) throw ResourceError("grid maximum exceeds the guard");
}

inline long double factorial(int k) {
    long double r = 1;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Theta(a; X) and its leading constant

inline FitResult summatory_theta(const CurveModel& c, int a, const std::vector<std::int64_t>& grid, SieveOptions opt = {}) {
    detail::check_grid(grid, 100'000'000);
    auto th = theta_sieve(c, a, static_cast<std::uint32_t>(grid.back()), opt);
    std::vector<long double> vals;
    long double acc = 0;
    std::size_t k = 0;
    for (std::int64_t n = 1; n <= grid.back(); ++n) {
        acc += th[n - 1];
        if (n == grid[k]) {
            vals.push_back(acc);
            ++k;
        }
    }
    return fit_growth(grid, vals, 1, c.lambda - 1);
}

/// L(chi, 1) for the primitive real character of fundamental discriminant D, by the finite formulas
/// L = -pi/|D|^{3/2} sum a chi(a) (D < 0) and L = -1/sqrt(D) sum chi(a) log sin(pi a/D) (D > 0).
inline long double l_chi_at_one(std::int64_t D) {
    if (D == 1 || D == 0) throw PreconditionError("l_chi_at_one: need a nontrivial discriminant");
    const std::uint64_t k = static_cast<std::uint64_t>(D < 0 ? -D : D);
    long double s = 0;
    const long double pi = std::numbers::pi_v<long double>;
    for (std::uint64_t x = 1; x < k; ++x) {
        int chi = nt::kronecker(D, x);
        if (!chi) continue;
        if (D < 0)
            s += chi * static_cast<long double>(x);
        else
            s += chi * std::log(std::sin(pi * x / k));
    }
    return D < 0 ? -pi * s / (k * std::sqrt(static_cast<long double>(k))) : -s / std::sqrt(static_cast<long double>(k));
}

struct EulerResidue {
    int lambda = 1;
    long double residue = 0;  // lim (s-1)^lambda L_a(s)
    long double c1 = 0;       // residue / (lambda-1)!
    std::optional<long double> l_chi;
    std::int64_t chi_discriminant = 1;
    std::uint32_t p_max = 0;
    /// relative error bound on the truncation for lambda >= 2; for lambda = 1 the product is only
    /// conditionally convergent and this is the change between P_max/4 and P_max (heuristic)
    long double tail = 0;
    bool tail_is_bound = false;
};

namespace detail {

/// sum_k theta(p^{ka}) p^{-k} for p | Delta. theta(p^n) is constant once n > 2 v_p(Delta) (Hensel),
/// so the series closes with a geometric tail there.
inline long double bad_local_factor(const CurveModel& c, std::uint64_t p, int a) {
    const int v = factorize(mpz_class(abs(c.discriminant))).valuation(p);
    const long double pinv = 1.0L / p;
    long double s = 1, pk = 1;
    for (int k = 1;; ++k) {
        if (k * a * std::log2(static_cast<long double>(p)) > 62)
            throw ResourceError("bad_local_factor: p^k exceeds 64 bits before stabilizing");
        pk *= pinv;
        u64 t = theta_prime_power(c, p, k * a);
        s += t * pk;
        if (k * a > 2 * v) return s + t * pk / (p - 1);
    }
}

}  // namespace detail

inline EulerResidue euler_residue(const CurveModel& c, int a = 1, std::uint32_t p_max = 1'000'000) {
    if (a < 1) throw PreconditionError("euler_residue: a >= 1");
    EulerResidue e;
    e.lambda = c.lambda;
    e.p_max = p_max;
    auto spf = nt::spf_table(p_max);
    auto rc = prime_root_counts(c, spf, 1);
    std::optional<QuadCharacter> chi = quad_character(c);
    if (chi) {
        e.chi_discriminant = chi->discriminant;
        e.l_chi = l_chi_at_one(chi->discriminant);
    }
    auto log_factor = [&](std::uint64_t p, bool bad) {
        long double lp = bad ? detail::bad_local_factor(c, p, a) : 1 + rc[p] / static_cast<long double>(p - 1);
        long double r = std::log(lp) + c.lambda * std::log1p(-1.0L / p);
        if (chi) r += std::log1p(-(*chi)(p) / static_cast<long double>(p));
        return r;
    };
    long double logR = 0, logR_quarter = 0;
    for (std::uint32_t p = 2; p <= p_max; ++p) {
        if (spf[p] != p) continue;
        long double l = log_factor(p, detail::divides_discriminant(c, p));
        logR += l;
        if (p <= p_max / 4) logR_quarter += l;
    }
    long double extra = 0;
    for (auto [p, k] : factorize(mpz_class(abs(c.discriminant))).factors)
        if (p > p_max) extra += log_factor(p, true);
    logR += extra;
    logR_quarter += extra;
    e.residue = std::exp(logR) * (e.l_chi ? *e.l_chi : 1.0L);
    e.c1 = e.residue / detail::factorial(c.lambda - 1);
    if (c.lambda >= 2) {
        // good factors are 1 + O(3/p^2)
        e.tail = std::expm1(3.1L / p_max);
        e.tail_is_bound = true;
    } else {
        e.tail = std::fabs(std::expm1(logR - logR_quarter));
    }
    return e;
}

// ---------------------------------------------------------------------------
// sum w(n)

inline FitResult summatory_w(const CurveModel& c, const std::vector<std::int64_t>& grid, SieveOptions opt = {}) {
    detail::check_grid(grid, 1'000'000);
    WContext ctx(c);
    auto w1 = w1_sieve(c, static_cast<std::uint32_t>(grid.back()), opt);
    std::vector<long double> vals;
    long double acc = 0;
    std::size_t k = 0;
    for (std::int64_t n = 1; n <= grid.back(); ++n) {
        acc += w1[n - 1];
        if (n == grid[k]) {
            vals.push_back(acc * ctx.w0());
            ++k;
        }
    }
    return fit_growth(grid, vals, 1, c.lambda - 1);
}

// ---------------------------------------------------------------------------
// Sums of phi-type functions

struct PhiSumCheck {
    long double sum1 = 0, main1 = 0;  // sum phi(ln)/(ln) over (n,q)=1 vs 6/pi^2 phi1(lq) X
    long double sum2 = 0, main2 = 0;  // sum |mu(n)| phi1(n) over (n,q)=1 vs c2 phi2(q) X
    long double c2 = 0;
    long double sum3 = 0;             // sum sigma_{-delta}(n) theta(n^2) / phi1(n)
    long double C3 = 0;               // sum3 / (X (log X)^{lambda-1})
    long double rel_err1() const { return std::fabs(sum1 - main1) / main1; }
    long double rel_err2() const { return std::fabs(sum2 - main2) / main2; }
};

inline long double c2_constant(std::uint32_t p_max = 10'000'000) {
    long double s = 0;
    for (auto p : nt::primes_up_to(p_max)) s += std::log1p(-2.0L / (static_cast<long double>(p) * (p + 1)));
    return std::exp(s);
}

inline PhiSumCheck phi_sum_checks(const CurveModel& c, std::uint64_t l, std::uint64_t q, std::uint32_t X,
                                  long double delta = 0.5L) {
    if (l < 1 || q < 1 || X < 1) throw PreconditionError("phi_sum_checks: l, q, X >= 1");
    if (nt::gcd(l, q) != 1) throw PreconditionError("phi_sum_checks: gcd(l, q) must be 1");
    if (X > 10'000'000) throw ResourceError("phi_sum_checks: X > 10^7");
    auto spf = nt::spf_table(std::max<std::uint32_t>(X, 2));
    auto th2 = theta_sieve(c, 2, X);
    auto lf = factorize(l), qf = factorize(q);
    PhiSumCheck r;
    for (std::uint32_t n = 1; n <= X; ++n) {
        std::uint32_t m = n;
        bool coprime_q = true, squarefree = true;
        long double phi_ln = 1, phi1n = 1, sig = 1;
        while (m > 1) {
            std::uint32_t p = spf[m];
            int e = 0;
            while (m % p == 0) {
                m /= p;
                ++e;
            }
            if (q % p == 0) coprime_q = false;
            if (e > 1) squarefree = false;
            if (l % p) phi_ln *= 1 - 1.0L / p;
            phi1n *= static_cast<long double>(p) / (p + 1);
            long double s = 1, pt = 1, pd = std::pow(static_cast<long double>(p), -delta);
            for (int i = 0; i < e; ++i) s += (pt *= pd);
            sig *= s;
        }
        if (coprime_q) {
            long double v = phi_ln;
            for (auto [p, k] : lf.factors) v *= 1 - 1.0L / p;
            r.sum1 += v;
            if (squarefree) r.sum2 += phi1n;
        }
        r.sum3 += sig * th2[n - 1] / phi1n;
    }
    const long double six_pi2 = 6 / (std::numbers::pi_v<long double> * std::numbers::pi_v<long double>);
    r.main1 = six_pi2 * phi1(multiply(lf, qf)).get_d() * X;
    r.c2 = c2_constant();
    r.main2 = r.c2 * phi2(qf).get_d() * X;
    long double LX = std::log(static_cast<long double>(std::max<std::uint32_t>(X, 3)));
    r.C3 = r.sum3 / (X * std::pow(LX, c.lambda - 1));
    return r;
}

// ---------------------------------------------------------------------------
// The region {0 < G <= 1}

inline long double region_G(const CurveModel& c, long double alpha, long double t, long double u, long double v) {
    if (!(u > 0 && v > 0)) throw PreconditionError("region_G: need u, v > 0");
    const long double z = u * u * v;
    const long double w = v * (t * t * t + c.A * t * z * z + c.B * z * z * z);
    if (!(w > 0)) return std::numeric_limits<long double>::infinity();
    const long double e = 0.25L + 2 * alpha;
    const long double we = std::pow(w, e);
    return std::max({w, std::fabs(t) / we, z / we, u / (std::sqrt(c.C0()) * std::pow(w, 4 * alpha))});
}

inline bool in_region(const CurveModel& c, long double alpha, long double t, long double u, long double v) {
    return region_G(c, alpha, t, u, v) <= 1;
}

struct RegionSlice {
    long double v_lo = 0, v_hi = 0;
    long double mass = 0, std_error = 0;
    std::uint64_t samples = 0, hits = 0;
};

struct RegionSample {
    long double alpha = 0;
    long double C0 = 0;
    long double estimate = 0;
    long double std_error = 0;
    std::uint64_t samples = 0;
    long double v_cutoff = 0;
    long double tail_bound = 0;
    long double decay_exponent = 0;  // p in slice density ~ v^{-p}, from the last slices
    std::vector<RegionSlice> slices;
    std::string summary() const {
        std::ostringstream os;
        os.precision(10);
        os << "alpha=" << alpha << " estimate=" << estimate << " std_error=" << std_error << " samples=" << samples
           << " v_cutoff=" << v_cutoff << " tail_bound=" << tail_bound << " decay_exponent=" << decay_exponent;
        return os.str();
    }
};

struct OmegaOptions {
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::uint64_t chunk = 1 << 15;            // samples per substream
    std::uint64_t samples_per_slice = 1 << 18;
    std::uint64_t max_samples = 400'000'000;  // total budget
    long double v_max = 1e9L;
    int decay_window = 6;                     // slices used to measure the decay
};

/// Monte Carlo mass of the region inside |t| <= 1, 0 < u <= u_max, v_lo < v <= v_hi.
/// Points of the region satisfy u^2 v <= 1, so u_max = min(sqrt(C0), v_lo^{-1/2}).
/// Chunk k of slice s draws from the substream seeded by (seed, s, k): results do not depend on workers.
inline RegionSlice region_slice(const CurveModel& c, long double alpha, long double v_lo, long double v_hi,
                                std::uint64_t samples, std::uint64_t slice_id, const OmegaOptions& opt) {
    const long double u_max = std::min<long double>(std::sqrt(c.C0()), v_lo > 0 ? 1 / std::sqrt(v_lo) : 1e300L);
    const std::uint64_t chunks = (samples + opt.chunk - 1) / opt.chunk;
    std::vector<std::uint64_t> hits(chunks, 0);
    auto run = [&](unsigned w) {
        for (std::uint64_t k = w; k < chunks; k += std::max(1u, opt.workers)) {
            std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                              static_cast<std::uint32_t>(slice_id), static_cast<std::uint32_t>(k),
                              static_cast<std::uint32_t>(k >> 32)};
            std::mt19937_64 rng(seq);
            std::uniform_real_distribution<double> U(0.0, 1.0);
            const std::uint64_t n = std::min(opt.chunk, samples - k * opt.chunk);
            std::uint64_t h = 0;
            for (std::uint64_t i = 0; i < n; ++i) {
                long double t = 2 * static_cast<long double>(U(rng)) - 1;
                long double u = u_max * (1 - static_cast<long double>(U(rng)));
                long double v = v_lo + (v_hi - v_lo) * (1 - static_cast<long double>(U(rng)));
                h += in_region(c, alpha, t, u, v);
            }
            hits[k] = h;
        }
    };
    if (opt.workers <= 1) {
        run(0);
    } else {
        std::vector<std::thread> th;
        for (unsigned w = 0; w < opt.workers; ++w) th.emplace_back(run, w);
        for (auto& t : th) t.join();
    }
    RegionSlice s;
    s.v_lo = v_lo;
    s.v_hi = v_hi;
    s.samples = samples;
    for (auto h : hits) s.hits += h;
    const long double box = 2 * u_max * (v_hi - v_lo);
    const long double p = static_cast<long double>(s.hits) / samples;
    s.mass = box * p;
    s.std_error = box * std::sqrt(p * (1 - p) / samples);
    return s;
}

namespace detail {

/// slope of log(mass) against log(v) over the last `window` dyadic slices; density exponent p = 1 - slope
inline long double decay_exponent(const std::vector<RegionSlice>& s, int window) {
    std::vector<std::pair<long double, long double>> pts;
    for (std::size_t i = s.size() > static_cast<std::size_t>(window) ? s.size() - window : 1; i < s.size(); ++i)
        if (s[i].mass > 0 && s[i].v_lo > 0) pts.push_back({std::log(s[i].v_lo), std::log(s[i].mass)});
    if (pts.size() < 2) return std::numeric_limits<long double>::infinity();
    long double mx = 0, my = 0;
    for (auto [x, y] : pts) mx += x, my += y;
    mx /= pts.size();
    my /= pts.size();
    long double sxy = 0, sxx = 0;
    for (auto [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
    return 1 - sxy / sxx;
}

inline void total(RegionSample& r) {
    long double e = 0, var = 0;
    std::uint64_t n = 0;
    for (const auto& s : r.slices) {
        e += s.mass;
        var += s.std_error * s.std_error;
        n += s.samples;
    }
    r.estimate = e;
    r.std_error = std::sqrt(var);
    r.samples = n;
    r.v_cutoff = r.slices.empty() ? 0 : r.slices.back().v_hi;
}

}  // namespace detail

/// Omega truncated to v <= v_cut with dyadic slices [0,1], (1,2], (2,4], ...
inline RegionSample omega_truncated(const CurveModel& c, long double alpha, long double v_cut, const OmegaOptions& opt = {}) {
    if (!(alpha > 0 && alpha < 0.125L)) throw PreconditionError("omega: need 0 < alpha < 1/8");
    RegionSample r;
    r.alpha = alpha;
    r.C0 = c.C0();
    long double lo = 0, hi = 1;
    for (std::uint64_t id = 0; lo < v_cut; ++id) {
        r.slices.push_back(region_slice(c, alpha, lo, std::min(hi, v_cut), opt.samples_per_slice, id, opt));
        lo = hi;
        hi *= 2;
    }
    detail::total(r);
    r.decay_exponent = detail::decay_exponent(r.slices, opt.decay_window);
    return r;
}

/// Adaptive estimate: slices are added until the geometric tail implied by the measured decay is
/// below a fraction of the target error; samples double until the standard error meets the target.
/// A decay exponent <= 1 leaves the tail unbounded and raises BudgetError with the partial estimate.
inline RegionSample omega(const CurveModel& c, long double alpha, long double target_rel_err, const OmegaOptions& opt = {},
                          RegionSample* partial = nullptr) {
    if (!(alpha > 0 && alpha < 0.125L)) throw PreconditionError("omega: need 0 < alpha < 1/8");
    if (!(target_rel_err > 0)) throw PreconditionError("omega: target_rel_err > 0");
    OmegaOptions o = opt;
    for (;;) {
        RegionSample r;
        r.alpha = alpha;
        r.C0 = c.C0();
        long double lo = 0, hi = 1;
        bool converged = false;
        for (std::uint64_t id = 0; lo < o.v_max; ++id) {
            r.slices.push_back(region_slice(c, alpha, lo, hi, o.samples_per_slice, id, o));
            lo = hi;
            hi *= 2;
            detail::total(r);
            if (static_cast<int>(r.slices.size()) < o.decay_window + 2) continue;
            long double p = detail::decay_exponent(r.slices, o.decay_window);
            r.decay_exponent = p;
            if (p > 1) {
                long double ratio = std::pow(2.0L, 1 - p);
                r.tail_bound = r.slices.back().mass * ratio / (1 - ratio);
                if (r.tail_bound < 0.01L * r.estimate && r.tail_bound < 0.25L * target_rel_err * r.estimate) {
                    converged = true;
                    break;
                }
            }
        }
        detail::total(r);
        if (!converged) {
            r.tail_bound = std::numeric_limits<long double>::infinity();
            if (partial) *partial = r;
            throw BudgetError("omega: slice mass does not decay faster than 1/v; tail unbounded at v_cutoff", r.summary());
        }
        if (r.std_error <= target_rel_err * r.estimate) return r;
        if (r.samples * 2 > o.max_samples) {
            if (partial) *partial = r;
            throw BudgetError("omega: sample budget exhausted before target error", r.summary());
        }
        o.samples_per_slice *= 2;
    }
}

struct LatticeCount {
    long double X = 0;
    std::uint64_t count = 0;
    long double scale = 0;  // frak X * frak Z * frak D = X^{1/2} y
    long double normalized() const { return count / scale; }
};

/// Integer points (x, z, d1), z, d1 >= 1, with 0 < G(x/frakX, z/frakZ, d1/frakD) <= 1 at fixed y and C.
inline LatticeCount lattice_region_count(const CurveModel& c, long double alpha, long double X, long double y = 1,
                                         long double C = 1) {
    if (!(alpha > 0 && alpha < 0.125L)) throw PreconditionError("lattice_region_count: need 0 < alpha < 1/8");
    const long double fX = C * std::pow(X, 0.25L + 2 * alpha);
    const long double fZ = C * C * std::pow(X, 4 * alpha) / y;
    const long double fD = y * y * std::pow(X, 0.25L - 6 * alpha) / (C * C * C);
    LatticeCount out;
    out.X = X;
    out.scale = fX * fZ * fD;
    if (fX * std::sqrt(c.C0()) * fZ * fD > 1e10L) throw ResourceError("lattice_region_count: box too large");
    const auto xmax = static_cast<std::int64_t>(std::floor(fX));
    const auto zmax = static_cast<std::int64_t>(std::floor(std::sqrt(c.C0()) * fZ));
    for (std::int64_t z = 1; z <= zmax; ++z) {
        long double u = z / fZ;
        // u^2 v <= 1
        auto dmax = static_cast<std::int64_t>(std::floor(fD / (u * u)));
        for (std::int64_t d1 = 1; d1 <= dmax; ++d1) {
            long double v = d1 / fD;
            for (std::int64_t x = -xmax; x <= xmax; ++x) out.count += in_region(c, alpha, x / fX, u, v);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Growth of the point count

struct GrowthReport {
    FitResult fit;  // N*_alpha with sigma = 1/2, m = lambda
    std::vector<std::int64_t> N_star, N_dagger, N;
    std::vector<long double> ratio;  // N* / (2 T2 N)
    long double slope = 0;           // least-squares slope of log N* against log X
    bool inequality_holds = true;    // 2 T2 N <= N* everywhere
};

/// Counts at every grid point from one enumeration at the largest X (the per-d conditions
/// do not depend on X).
inline GrowthReport growth_from_report(const CurveModel& c, const CountReport& rep, const std::vector<std::int64_t>& grid) {
    if (grid.empty()) throw PreconditionError("growth_report: empty grid");
    if (grid.back() > rep.X) throw PreconditionError("growth_report: grid exceeds the enumerated range");
    GrowthReport g;
    for (auto X : grid) {
        std::int64_t ns = 0, nd = 0, n = 0;
        for (const auto& [d, v] : rep.per_d) {
            if (d > X) break;
            std::int64_t nt = 0;
            for (const auto& r : v) nt += !r.torsion;
            nd += static_cast<std::int64_t>(v.size());
            ns += nt;
            n += nt > 0;
        }
        g.N_star.push_back(ns);
        g.N_dagger.push_back(nd);
        g.N.push_back(n);
        g.ratio.push_back(n ? static_cast<long double>(ns) / (2.0L * c.T2 * n) : std::numeric_limits<long double>::quiet_NaN());
        g.inequality_holds = g.inequality_holds && 2 * c.T2 * n <= ns;
    }
    std::vector<long double> vals(g.N_star.begin(), g.N_star.end());
    g.fit = fit_growth(grid, vals, 0.5L, c.lambda);
    long double mx = 0, my = 0;
    int k = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (g.N_star[i] > 0) mx += std::log((long double)grid[i]), my += std::log((long double)g.N_star[i]), ++k;
    if (k >= 2) {
        mx /= k;
        my /= k;
        long double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (g.N_star[i] > 0) {
                long double x = std::log((long double)grid[i]) - mx, y = std::log((long double)g.N_star[i]) - my;
                sxy += x * y;
                sxx += x * x;
            }
        g.slope = sxy / sxx;
    }
    return g;
}

inline GrowthReport growth_report(const CurveModel& c, long double alpha, const std::vector<std::int64_t>& grid,
                                  const HeightGap& gap, const EnumerationOptions& opt = {}) {
    if (grid.empty()) throw PreconditionError("growth_report: empty grid");
    detail::check_grid(grid, std::numeric_limits<std::int64_t>::max());
    auto rep = enumerate_small_points(c, grid.back(), alpha, gap, opt);
    return growth_from_report(c, rep, grid);
}

}  // namespace twistcount
