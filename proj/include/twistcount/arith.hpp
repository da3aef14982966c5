#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "twistcount/curve.hpp"
#include "twistcount/error.hpp"
#include "twistcount/numtheory.hpp"

namespace twistcount {

using nt::i128;
using nt::i64;
using nt::u128;
using nt::u64;

struct FactoredInt {
    mpz_class value{1};
    std::vector<std::pair<u64, int>> factors;

    bool fits_u64() const { return mpz_sizeinbase(value.get_mpz_t(), 2) <= 64; }
    u64 as_u64() const {
        if (!fits_u64()) throw ResourceError("FactoredInt does not fit in 64 bits");
        return static_cast<u64>(mpz_get_ui(value.get_mpz_t()));
    }
    int valuation(u64 p) const {
        for (auto [q, e] : factors)
            if (q == p) return e;
        return 0;
    }
};

inline FactoredInt factorize(u64 n) {
    if (n == 0) throw PreconditionError("factorize: n must be >= 1");
    FactoredInt f;
    f.value = mpz_class(static_cast<unsigned long>(n));
    f.factors = nt::factor_u64(n);
    return f;
}

inline FactoredInt factorize(const mpz_class& n) {
    if (n < 1) throw PreconditionError("factorize: n must be >= 1");
    if (mpz_sizeinbase(n.get_mpz_t(), 2) > 64) throw ResourceError("factorize: input exceeds 64 bits");
    return factorize(static_cast<u64>(mpz_get_ui(n.get_mpz_t())));
}

/// Builds a FactoredInt from (prime, exponent) pairs (any order, repeats merged).
inline FactoredInt from_factors(std::vector<std::pair<u64, int>> fac) {
    std::sort(fac.begin(), fac.end());
    FactoredInt f;
    for (auto [p, e] : fac) {
        if (e <= 0) continue;
        if (!f.factors.empty() && f.factors.back().first == p)
            f.factors.back().second += e;
        else
            f.factors.push_back({p, e});
    }
    mpz_class v = 1, pp;
    for (auto [p, e] : f.factors) {
        mpz_ui_pow_ui(pp.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e));
        v *= pp;
    }
    f.value = v;
    return f;
}

inline FactoredInt multiply(const FactoredInt& a, const FactoredInt& b) {
    auto fac = a.factors;
    fac.insert(fac.end(), b.factors.begin(), b.factors.end());
    return from_factors(std::move(fac));
}

inline FactoredInt power(const FactoredInt& a, int k) {
    auto fac = a.factors;
    for (auto& pe : fac) pe.second *= k;
    return from_factors(std::move(fac));
}

// ---------------------------------------------------------------------------
// Polynomials over F_p (degree <= 3 in practice), low coefficient first

namespace poly {

using Poly = std::vector<u64>;

inline void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

inline Poly mod(Poly a, const Poly& f, u64 p) {
    trim(a);
    const std::size_t df = f.size() - 1;
    u64 inv = nt::invmod(f.back(), p);
    while (a.size() > df) {
        u64 c = nt::mulmod(a.back(), inv, p);
        std::size_t shift = a.size() - 1 - df;
        for (std::size_t i = 0; i <= df; ++i) a[shift + i] = (a[shift + i] + p - nt::mulmod(c, f[i], p)) % p;
        trim(a);
    }
    return a;
}

inline Poly mulmod(const Poly& a, const Poly& b, const Poly& f, u64 p) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + nt::mulmod(a[i], b[j], p)) % p;
    return mod(std::move(r), f, p);
}

inline Poly powmod(Poly base, u64 e, const Poly& f, u64 p) {
    Poly r{1};
    base = mod(std::move(base), f, p);
    while (e) {
        if (e & 1) r = mulmod(r, base, f, p);
        base = mulmod(base, base, f, p);
        e >>= 1;
    }
    return r;
}

inline Poly monic(Poly a, u64 p) {
    trim(a);
    if (a.empty()) return a;
    u64 inv = nt::invmod(a.back(), p);
    for (auto& c : a) c = nt::mulmod(c, inv, p);
    return a;
}

inline Poly gcd(Poly a, Poly b, u64 p) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = mod(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    return monic(std::move(a), p);
}

inline Poly sub(Poly a, const Poly& b, u64 p) {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] = (a[i] + p - b[i]) % p;
    trim(a);
    return a;
}

/// Distinct roots of a monic squarefree product of linear factors g, by equal-degree splitting.
inline void split_linear(const Poly& g, u64 p, std::vector<u64>& out, u64 seed = 0) {
    const std::size_t deg = g.size() - 1;
    if (deg == 0) return;
    if (deg == 1) {
        out.push_back((p - g[0]) % p);
        return;
    }
    for (u64 delta = seed;; ++delta) {
        Poly h = powmod(Poly{delta % p, 1}, (p - 1) / 2, g, p);
        Poly d = gcd(g, sub(h, Poly{1}, p), p);
        std::size_t dd = d.empty() ? 0 : d.size() - 1;
        if (dd == 0 || dd == deg) continue;
        // g = d * (g / d); recover the cofactor by splitting g with gcd against h + 1
        Poly e = gcd(g, sub(h, Poly{p - 1}, p), p);
        Poly zero_part = gcd(g, Poly{delta % p, 1}, p);
        split_linear(d, p, out, delta + 1);
        if (!e.empty() && e.size() > 1) split_linear(e, p, out, delta + 1);
        if (!zero_part.empty() && zero_part.size() > 1) split_linear(zero_part, p, out, delta + 1);
        return;
    }
}

}  // namespace poly

// ---------------------------------------------------------------------------
// Roots of F modulo prime powers

inline u64 f_mod(const CurveModel& c, u64 x, u64 m) {
    u64 a = nt::mod_signed(c.A, m), b = nt::mod_signed(c.B, m);
    x %= m;
    u64 x2 = nt::mulmod(x, x, m);
    u64 v = nt::mulmod(x2, x, m);
    v = (v + nt::mulmod(a, x, m)) % m;
    return (v + b) % m;
}

inline u64 fprime_mod(const CurveModel& c, u64 x, u64 m) {
    u64 a = nt::mod_signed(c.A, m);
    x %= m;
    return (nt::mulmod(3 % m, nt::mulmod(x, x, m), m) + a) % m;
}

namespace detail {
constexpr u64 kBruteForcePrime = 64;
}

/// Number of distinct roots of F mod p.
inline int root_count_mod_p(const CurveModel& c, u64 p) {
    if (p < detail::kBruteForcePrime) {
        int n = 0;
        for (u64 x = 0; x < p; ++x) n += f_mod(c, x, p) == 0;
        return n;
    }
    poly::Poly f{nt::mod_signed(c.B, p), nt::mod_signed(c.A, p), 0, 1};
    poly::Poly xp = poly::powmod(poly::Poly{0, 1}, p, f, p);
    poly::Poly g = poly::gcd(f, poly::sub(xp, poly::Poly{0, 1}, p), p);
    return g.empty() ? 0 : static_cast<int>(g.size() - 1);
}

/// Distinct roots of F mod p, ascending.
inline std::vector<u64> roots_mod_p(const CurveModel& c, u64 p) {
    std::vector<u64> out;
    if (p < detail::kBruteForcePrime) {
        for (u64 x = 0; x < p; ++x)
            if (f_mod(c, x, p) == 0) out.push_back(x);
        return out;
    }
    poly::Poly f{nt::mod_signed(c.B, p), nt::mod_signed(c.A, p), 0, 1};
    poly::Poly xp = poly::powmod(poly::Poly{0, 1}, p, f, p);
    poly::Poly g = poly::gcd(f, poly::sub(xp, poly::Poly{0, 1}, p), p);
    if (g.size() > 1) poly::split_linear(g, p, out);
    std::sort(out.begin(), out.end());
    return out;
}

inline constexpr std::size_t kMaxLiftedRoots = 20'000'000;

/// All roots of F mod p^k, ascending. Requires p^k < 2^62.
inline std::vector<u64> roots_mod_prime_power(const CurveModel& c, u64 p, int k) {
    if (k < 1) return {0};
    long double lg = k * std::log2(static_cast<long double>(p));
    if (lg >= 62) throw ResourceError("roots_mod_prime_power: p^k too large");
    std::vector<u64> cur = roots_mod_p(c, p);
    u64 pj = p;
    for (int j = 1; j < k && !cur.empty(); ++j) {
        u64 next_mod = pj * p;
        std::vector<u64> nxt;
        for (u64 r : cur) {
            u64 fr = f_mod(c, r, next_mod);
            u64 dr = fprime_mod(c, r, p);
            if (dr != 0) {
                // F(r + t p^j) = F(r) + t p^j F'(r) mod p^{j+1}
                u64 q = (fr / pj) % p;
                u64 t = nt::mulmod((p - q) % p, nt::invmod(dr, p), p);
                nxt.push_back(r + t * pj);
            } else if (fr == 0) {
                for (u64 t = 0; t < p; ++t) nxt.push_back(r + t * pj);
                if (nxt.size() > kMaxLiftedRoots) throw ResourceError("roots_mod_prime_power: root set too large");
            }
        }
        cur = std::move(nxt);
        pj = next_mod;
    }
    std::sort(cur.begin(), cur.end());
    return cur;
}

namespace detail {

inline bool divides_discriminant(const CurveModel& c, u64 p) {
    return mpz_divisible_ui_p(c.discriminant.get_mpz_t(), static_cast<unsigned long>(p)) != 0;
}

}  // namespace detail

/// theta(p^k) for one prime power.
inline u64 theta_prime_power(const CurveModel& c, u64 p, int k) {
    if (k == 0) return 1;
    if (!detail::divides_discriminant(c, p)) return static_cast<u64>(root_count_mod_p(c, p));
    return roots_mod_prime_power(c, p, k).size();
}

/// Number of residues rho mod n with F(rho) = 0 mod n.
inline u64 theta(const CurveModel& c, const FactoredInt& n) {
    u64 r = 1;
    for (auto [p, e] : n.factors) {
        u64 t = theta_prime_power(c, p, e);
        if (t == 0) return 0;
        r *= t;
    }
    return r;
}

inline u64 theta(const CurveModel& c, u64 n) { return theta(c, factorize(n)); }

/// All roots of F mod n (n < 2^62), ascending, combined by CRT.
inline std::vector<u64> roots_mod(const CurveModel& c, const FactoredInt& n) {
    std::vector<u64> acc{0};
    u64 m = 1;
    for (auto [p, e] : n.factors) {
        u64 pe = 1;
        for (int i = 0; i < e; ++i) pe *= p;
        std::vector<u64> rs;
        if (!detail::divides_discriminant(c, p) && e > 1) {
            // unique lifts of simple roots
            for (u64 r0 : roots_mod_p(c, p)) {
                u64 r = r0, pj = p;
                for (int j = 1; j < e; ++j) {
                    u64 nm = pj * p;
                    u64 q = (f_mod(c, r, nm) / pj) % p;
                    u64 t = nt::mulmod((p - q) % p, nt::invmod(fprime_mod(c, r, p), p), p);
                    r += t * pj;
                    pj = nm;
                }
                rs.push_back(r);
            }
        } else {
            rs = roots_mod_prime_power(c, p, e);
        }
        if (rs.empty()) return {};
        // CRT combine acc (mod m) with rs (mod pe)
        u64 inv = nt::invmod(m % pe, pe);
        std::vector<u64> nxt;
        nxt.reserve(acc.size() * rs.size());
        u64 nm = m * pe;
        for (u64 a : acc)
            for (u64 r : rs) {
                u64 diff = (r + pe - a % pe) % pe;
                u64 t = nt::mulmod(diff, inv, pe);
                nxt.push_back(a + static_cast<u64>(static_cast<u128>(t) * m % nm));
            }
        if (nxt.size() > kMaxLiftedRoots) throw ResourceError("roots_mod: root set too large");
        acc = std::move(nxt);
        m = nm;
    }
    std::sort(acc.begin(), acc.end());
    return acc;
}

/// C = prod_{p | Delta} max_{k <= kmax} theta(p^k); theta(ab) <= C theta(a) theta(b).
inline u64 theta_submult_constant(const CurveModel& c, int kmax = 12) {
    mpz_class d = abs(c.discriminant);
    auto fac = factorize(d);
    u64 C = 1;
    for (auto [p, e] : fac.factors) {
        u64 best = 0;
        for (int k = 1; k <= kmax && k * std::log2(static_cast<double>(p)) < 60; ++k)
            best = std::max(best, theta_prime_power(c, p, k));
        C *= std::max<u64>(best, 1);
    }
    return C;
}

// ---------------------------------------------------------------------------
// Sieves

struct SieveOptions {
    std::size_t memory_budget_bytes = std::size_t(2) << 30;
    unsigned workers = 1;
};

/// Root counts theta(p) for every prime p <= X, indexed by p (0 elsewhere).
/// Primes are partitioned across workers; the result is independent of the split.
inline std::vector<std::uint8_t> prime_root_counts(const CurveModel& c, const std::vector<std::uint32_t>& spf,
                                                   unsigned workers) {
    const std::size_t X = spf.size() - 1;
    std::vector<std::uint8_t> out(X + 1, 0);
    workers = std::max(1u, workers);
    auto job = [&](unsigned w) {
        for (std::size_t p = 2 + w; p <= X; p += workers)
            if (spf[p] == p) out[p] = static_cast<std::uint8_t>(root_count_mod_p(c, p));
    };
    if (workers == 1) {
        job(0);
    } else {
        std::vector<std::thread> ts;
        for (unsigned w = 0; w < workers; ++w) ts.emplace_back(job, w);
        for (auto& t : ts) t.join();
    }
    return out;
}

/// Entry n-1 holds theta(n^a), n = 1..X.
inline std::vector<std::uint32_t> theta_sieve(const CurveModel& c, int a, std::uint32_t X, SieveOptions opt = {}) {
    if (a < 1 || X < 1) throw PreconditionError("theta_sieve: need a >= 1, X >= 1");
    const std::size_t need = static_cast<std::size_t>(X + 1) * (sizeof(std::uint32_t) * 2 + 1);
    if (need > opt.memory_budget_bytes) throw ResourceError("theta_sieve: memory budget exceeded");
    auto spf = nt::spf_table(X);
    auto rc = prime_root_counts(c, spf, opt.workers);
    std::map<std::pair<u64, int>, u64> bad;  // theta(p^{a e}) for p | Delta
    std::vector<std::uint32_t> out(X, 0);
    out[0] = 1;
    for (std::uint64_t n = 2; n <= X; ++n) {
        std::uint32_t p = spf[n];
        std::uint64_t m = n;
        int e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        u64 local;
        if (!detail::divides_discriminant(c, p)) {
            local = rc[p];
        } else {
            auto key = std::pair<u64, int>(p, a * e);
            auto it = bad.find(key);
            if (it == bad.end()) it = bad.emplace(key, theta_prime_power(c, p, a * e)).first;
            local = it->second;
        }
        out[n - 1] = static_cast<std::uint32_t>(local * out[m - 1]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// phi_1, phi_2, sigma

inline mpq_class phi1(const FactoredInt& n) {
    mpq_class r = 1;
    for (auto [p, e] : n.factors) r *= mpq_class(static_cast<unsigned long>(p), static_cast<unsigned long>(p + 1));
    return r;
}

inline mpq_class phi2(const FactoredInt& n) {
    mpq_class r = 1;
    for (auto [p, e] : n.factors) r *= mpq_class(static_cast<unsigned long>(p + 1), static_cast<unsigned long>(p + 2));
    return r;
}

/// sum_{d | n} d^x
inline long double sigma(long double x, const FactoredInt& n) {
    long double r = 1;
    for (auto [p, e] : n.factors) {
        long double s = 1, term = 1, px = std::pow(static_cast<long double>(p), x);
        for (int i = 0; i < e; ++i) {
            term *= px;
            s += term;
        }
        r *= s;
    }
    return r;
}

// ---------------------------------------------------------------------------
// w(n)

struct WValue {
    long double value = 0;
    long double tail_bound = 0;
};

/// Precomputes primes and root counts up to P_max so that many w(n) can be
/// evaluated against one truncated product.
class WContext {
public:
    WContext(const CurveModel& c, std::uint32_t p_max = 100000) : curve_(c), p_max_(p_max) {
        auto spf = nt::spf_table(p_max);
        auto rc = prime_root_counts(c, spf, 1);
        long double logw0 = 0;
        for (std::uint32_t p = 2; p <= p_max; ++p) {
            if (spf[p] != p) continue;
            u64 t2 = detail::divides_discriminant(c, p) ? theta_prime_power(c, p, 2) : rc[p];
            primes_.push_back({p, t2});
            logw0 += std::log1p(-static_cast<long double>(t2) / (static_cast<long double>(p) * (p + 2)));
        }
        // primes of Delta beyond the bound always enter exactly
        auto fd = factorize(mpz_class(abs(c.discriminant)));
        for (auto [p, e] : fd.factors)
            if (p > p_max) {
                u64 t2 = theta_prime_power(c, p, 2);
                extra_.push_back({p, t2});
                logw0 += std::log1p(-static_cast<long double>(t2) / (static_cast<long double>(p) * (p + 2)));
            }
        log_w0_ = logw0;
    }

    long double w0() const { return std::exp(log_w0_); }
    std::uint32_t p_max() const { return p_max_; }

    /// sum_{p > P_max} theta(p^2)/(p(p+2)) < 3/P_max, so the truncated log-product is off by at most ~3.03/P_max.
    long double relative_tail() const { return std::expm1(3.03L / p_max_); }

    WValue operator()(const FactoredInt& n) const {
        long double logv = log_w0_;
        long double prod = 1;
        for (auto [p, k] : n.factors) {
            long double pl = static_cast<long double>(p);
            u64 t2k = theta_prime_power(curve_, p, 2 * k);
            u64 t2k2 = theta_prime_power(curve_, p, 2 * k + 2);
            long double local = (static_cast<long double>(t2k) - static_cast<long double>(t2k2) / (pl * pl)) / (1 + 2 / pl);
            if (local == 0) return {0, 0};
            prod *= local;
            // remove the p factor from the prime product
            u64 t2 = theta_prime_power(curve_, p, 2);
            bool in_product = p <= p_max_ || detail::divides_discriminant(curve_, p);
            if (in_product) logv -= std::log1p(-static_cast<long double>(t2) / (pl * (pl + 2)));
        }
        long double v = std::exp(logv) * prod;
        return {v, std::fabs(v) * relative_tail()};
    }

private:
    struct PrimeData {
        u64 p;
        u64 theta_p2;
    };
    const CurveModel& curve_;
    std::uint32_t p_max_;
    std::vector<PrimeData> primes_;
    std::vector<PrimeData> extra_;
    long double log_w0_ = 0;
};

inline WValue w_closed_form(const CurveModel& c, const FactoredInt& n, std::uint32_t p_max = 100000) {
    return WContext(c, p_max)(n);
}

/// Partial sums of the defining series over squarefree m <= M. The sieve
/// tables are built once so that many n can share them.
class WSeries {
public:
    WSeries(const CurveModel& c, std::uint32_t M) : curve_(c), M_(M) {
        if (M < 1) throw PreconditionError("w_series: M must be >= 1");
        spf_ = nt::spf_table(M);
        auto rc = prime_root_counts(c, spf_, 1);
        good_.assign(M + 1, 0);
        for (std::uint32_t p = 2; p <= M; ++p) {
            if (spf_[p] != p) continue;
            long double pl = p;
            long double t2 = detail::divides_discriminant(c, p) ? theta_prime_power(c, p, 2) : rc[p];
            good_[p] = static_cast<double>(t2 * pl / (pl + 2));
        }
        coprime_term_.assign(M + 1, 0);
        zero_part_.assign(M + 1, 1);
        for (std::uint32_t m = 1; m <= M; ++m) {
            std::uint32_t r = m;
            long double t = 1;
            std::uint32_t zeros = 1;
            bool sf = true;
            while (r > 1) {
                std::uint32_t p = spf_[r];
                r /= p;
                if (r % p == 0) {
                    sf = false;
                    break;
                }
                // primes with theta(p^2) = 0 are kept aside so that they can be revived when p | n
                if (good_[p] == 0)
                    zeros *= p, t = -t;
                else
                    t *= -static_cast<long double>(good_[p]);
            }
            if (!sf) continue;
            squarefree_.push_back(m);
            coprime_term_[m] = t / (static_cast<long double>(m) * m);
            zero_part_[m] = zeros;
        }
    }

    long double operator()(const FactoredInt& n) const {
        auto local = [&](u64 p, int e) {
            long double pl = static_cast<long double>(p);
            return static_cast<long double>(theta_prime_power(curve_, p, 2 * e)) * pl / (pl + 2);
        };
        // term(m) = mu(m) prod_{p | mn} local(p, v_p(mn)) / m^2; split off the primes of n
        struct Shared {
            u64 p;
            long double keep, with_p;
        };
        std::vector<Shared> sh;
        for (auto [p, e] : n.factors) sh.push_back({p, local(p, e), local(p, e + 1)});
        long double total = 0;
        for (std::uint32_t m : squarefree_) {
            long double term = coprime_term_[m];
            if (zero_part_[m] != 1) {
                std::uint32_t rest = zero_part_[m];
                for (const auto& s : sh)
                    if (rest % s.p == 0) rest /= static_cast<std::uint32_t>(s.p);
                if (rest != 1) continue;
            }
            for (const auto& s : sh) {
                if (m % s.p == 0)
                    term = (good_[s.p] == 0 ? term : term / good_[s.p]) * s.with_p;
                else
                    term *= s.keep;
            }
            total += term;
        }
        return total;
    }

private:
    const CurveModel& curve_;
    std::uint32_t M_;
    std::vector<std::uint32_t> spf_;
    std::vector<double> good_;
    std::vector<std::uint32_t> squarefree_;
    std::vector<long double> coprime_term_;
    std::vector<std::uint32_t> zero_part_;
};

inline long double w_series(const CurveModel& c, const FactoredInt& n, std::uint32_t M) { return WSeries(c, M)(n); }

/// w(n)/w0 for n = 1..X (entry n-1), by the multiplicative sieve.
inline std::vector<double> w1_sieve(const CurveModel& c, std::uint32_t X, SieveOptions opt = {}) {
    const std::size_t need = static_cast<std::size_t>(X + 1) * (sizeof(std::uint32_t) + sizeof(double) + 1);
    if (need > opt.memory_budget_bytes) throw ResourceError("w1_sieve: memory budget exceeded");
    auto spf = nt::spf_table(X);
    auto rc = prime_root_counts(c, spf, opt.workers);
    std::map<std::pair<u64, int>, double> bad;
    std::vector<double> out(X, 0);
    out[0] = 1;
    auto local = [&](u64 p, int k) -> double {
        long double pl = static_cast<long double>(p);
        if (!detail::divides_discriminant(c, p)) {
            long double t = rc[p];
            return static_cast<double>((t - t / (pl * pl)) / (1 + 2 / pl) / (1 - t / (pl * (pl + 2))));
        }
        auto key = std::pair<u64, int>(p, k);
        auto it = bad.find(key);
        if (it != bad.end()) return it->second;
        long double a = theta_prime_power(c, p, 2 * k), b = theta_prime_power(c, p, 2 * k + 2),
                    t2 = theta_prime_power(c, p, 2);
        double v = static_cast<double>((a - b / (pl * pl)) / (1 + 2 / pl) / (1 - t2 / (pl * (pl + 2))));
        bad.emplace(key, v);
        return v;
    };
    for (std::uint64_t n = 2; n <= X; ++n) {
        std::uint32_t p = spf[n];
        std::uint64_t m = n;
        int e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        out[n - 1] = local(p, e) * out[m - 1];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quadratic character for lambda = 2

struct QuadCharacter {
    i64 discriminant = 1;  // fundamental discriminant D
    u64 modulus = 1;       // |D|
    int operator()(u64 n) const { return nt::kronecker(discriminant, n); }
};

/// Squarefree part (with sign) of a nonzero integer.
inline i64 squarefree_part(i64 v) {
    if (v == 0) throw PreconditionError("squarefree_part: zero");
    u64 a = v < 0 ? static_cast<u64>(-v) : static_cast<u64>(v);
    i64 s = 1;
    for (auto [p, e] : nt::factor_u64(a))
        if (e % 2) s *= static_cast<i64>(p);
    return v < 0 ? -s : s;
}

inline i64 fundamental_discriminant(i64 v) {
    i64 s = squarefree_part(v);
    i64 r = ((s % 4) + 4) % 4;
    return r == 1 ? s : 4 * s;
}

inline std::optional<QuadCharacter> quad_character(const CurveModel& c) {
    if (c.lambda != 2) return std::nullopt;
    i64 r = c.rational_two_torsion_x.at(0);
    // F = (x - r)(x^2 + r x + r^2 + A)
    i128 disc = -3 * static_cast<i128>(r) * r - 4 * static_cast<i128>(c.A);
    if (disc > INT64_MAX || disc < -INT64_MAX) throw ResourceError("quad_character: discriminant too large");
    QuadCharacter chi;
    chi.discriminant = fundamental_discriminant(static_cast<i64>(disc));
    chi.modulus = static_cast<u64>(chi.discriminant < 0 ? -chi.discriminant : chi.discriminant);
    return chi;
}

// ---------------------------------------------------------------------------
// Interval and lattice counting

/// #{t1 < n <= t2 : F~(n, z) = 0 mod q}, from the root classes n = rho z mod q.
inline u64 count_roots_interval(const CurveModel& c, const FactoredInt& q, i64 z, long double t1, long double t2) {
    u64 qq = q.as_u64();
    if (nt::gcd(qq, nt::mod_signed(z, qq == 0 ? 1 : qq)) != 1 && qq != 1)
        throw PreconditionError("count_roots_interval: gcd(q, z) != 1");
    if (!(t1 < t2)) throw PreconditionError("count_roots_interval: need t1 < t2");
    if (qq == 1) return static_cast<u64>(std::floor(t2) - std::floor(t1));
    u64 zm = nt::mod_signed(z, qq);
    u64 total = 0;
    for (u64 rho : roots_mod(c, q)) {
        long double r = static_cast<long double>(nt::mulmod(rho, zm, qq));
        long double ql = static_cast<long double>(qq);
        // n = r + j q with t1 < n <= t2
        total += static_cast<u64>(std::floor((t2 - r) / ql) - std::floor((t1 - r) / ql));
    }
    return total;
}

/// Primitive pairs with |x1| <= X1, |x2| <= X2 and x1 m1 + x2 m2 = 0 mod q.
inline u64 hb_pair_count(i64 m1, i64 m2, u64 q, long double X1, long double X2) {
    if (q < 1) throw PreconditionError("hb_pair_count: q must be >= 1");
    if (nt::gcd(nt::gcd(nt::mod_signed(m1, q), nt::mod_signed(m2, q)), q) != 1 && q != 1)
        throw PreconditionError("hb_pair_count: gcd(m1, m2, q) != 1");
    const i64 B1 = static_cast<i64>(std::floor(X1)), B2 = static_cast<i64>(std::floor(X2));
    const u64 a = nt::mod_signed(m1, q), b = nt::mod_signed(m2, q);
    const u64 g = nt::gcd(b, q);
    const u64 step = q / g;
    const u64 binv = g == q ? 0 : nt::invmod((b / g) % step, step);
    u64 count = 0;
    for (i64 x1 = -B1; x1 <= B1; ++x1) {
        u64 rhs = nt::mulmod(nt::mod_signed(-static_cast<i128>(x1), q), a, q);  // need x2 b = rhs mod q
        if (rhs % g) continue;
        u64 x20 = step == 1 ? 0 : nt::mulmod(rhs / g, binv, step);
        // x2 = x20 + j step in [-B2, B2]
        i64 s = static_cast<i64>(step);
        i64 start = static_cast<i64>(x20) - ((static_cast<i64>(x20) + B2) / s) * s;
        for (i64 x2 = start; x2 <= B2; x2 += s)
            if (std::gcd(x1, x2) == 1) ++count;
    }
    return count;
}

}  // namespace twistcount
