#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "ffcm/common.hpp"
#include "ffcm/poly.hpp"

namespace ffcm {

// Complete factorization of f into a unit times monic irreducibles, with the
// b_i / k_i / r_i views used by the r = r_{j+1} prod b_i conventions.
struct Factorization {
  FqElem unit = 1;
  std::vector<std::pair<Poly, int>> factors;  // monic primes, sorted, e >= 1

  Poly reassemble(const Field& f) const {
    Poly r = Poly::constant(f, unit);
    for (const auto& [prime, e] : factors) r = r * prime.pow(unsigned(e));
    return r;
  }
  // b_i = prod_{prime^i || r} prime^i
  Poly b(const Field& f, int i) const {
    Poly r = Poly::one(f);
    for (const auto& [prime, e] : factors)
      if (e == i) r = r * prime.pow(unsigned(i));
    return r;
  }
  // k_i = prod_{prime^i || r} prime
  Poly k(const Field& f, int i) const {
    Poly r = Poly::one(f);
    for (const auto& [prime, e] : factors)
      if (e == i) r = r * prime;
    return r;
  }
  // r_i = prod_{prime^e || r, e >= i} prime^e
  Poly r(const Field& f, int i) const {
    Poly out = Poly::one(f);
    for (const auto& [prime, e] : factors)
      if (e >= i) out = out * prime.pow(unsigned(e));
    return out;
  }
  int exponent_of(const Poly& prime) const {
    for (const auto& [pr, e] : factors)
      if (pr == prime) return e;
    return 0;
  }
};

namespace detail {

// p-th root of f when f = g^p (all exponents divisible by p).  Coefficientwise
// c -> c^(p^(k-1)) inverts Frobenius on F_{p^k}.
inline Poly pth_root(const Poly& f) {
  const Field& fld = f.field();
  std::uint32_t p = fld.p();
  std::uint64_t frob_inv = 1;
  for (std::uint32_t i = 0; i + 1 < fld.k(); ++i) frob_inv *= p;
  std::vector<FqElem> c(std::size_t(f.deg() / int(p)) + 1, 0);
  for (int i = 0; i <= f.deg(); i += int(p))
    c[std::size_t(i / int(p))] = fld.pow(f.coeff(i), frob_inv);
  return Poly(fld, c);
}

// squarefree decomposition: returns list of (g_i, i) with f = prod g_i^i,
// g_i squarefree and pairwise coprime (Yun's algorithm adapted to char p).
inline void squarefree_decompose(const Poly& f, int multiplier,
                                 std::vector<std::pair<Poly, int>>& out) {
  const Field& fld = f.field();
  if (f.deg() <= 0) return;
  Poly d = f.derivative();
  if (d.is_zero()) {
    squarefree_decompose(pth_root(f), multiplier * int(fld.p()), out);
    return;
  }
  Poly c = gcd(f, d);
  Poly w = f / c;
  int i = 1;
  while (w.deg() > 0) {
    Poly y = gcd(w, c);
    Poly g = w / y;
    if (g.deg() > 0) out.emplace_back(g.make_monic(), i * multiplier);
    w = y;
    c = c / y;
    ++i;
  }
  if (c.deg() > 0)
    squarefree_decompose(pth_root(c), multiplier * int(fld.p()), out);
}

// splits a squarefree product of degree-d primes into its prime factors
inline void equal_degree_split(const Poly& f, int d, std::mt19937_64& rng,
                               std::vector<Poly>& out) {
  const Field& fld = f.field();
  if (f.deg() == d) {
    out.push_back(f.make_monic());
    return;
  }
  BigInt qd = pow_big(BigInt(fld.q()), unsigned(d));
  for (;;) {
    // random element of the quotient algebra
    std::vector<FqElem> c(std::size_t(f.deg()), 0);
    for (auto& x : c) x = FqElem(rng() % fld.q());
    Poly h(fld, c);
    if (h.deg() < 1) continue;
    Poly g = gcd(h, f);
    if (g.deg() == 0) {
      if (fld.p() == 2) {
        // trace map T(h) = h + h^2 + h^4 + ... splits for char 2
        Poly tr = Poly::zero(fld);
        Poly cur = h % f;
        std::uint64_t bits = std::uint64_t(fld.k()) * std::uint64_t(d);
        for (std::uint64_t i = 0; i < bits; ++i) {
          tr = (tr + cur) % f;
          cur = mulmod(cur, cur, f);
        }
        g = gcd(tr, f);
      } else {
        Poly e = powmod(h, (qd - 1) / 2, f);
        g = gcd(e - Poly::one(fld), f);
      }
    }
    if (g.deg() > 0 && g.deg() < f.deg()) {
      equal_degree_split(g, d, rng, out);
      equal_degree_split(f / g, d, rng, out);
      return;
    }
  }
}

}  // namespace detail

inline constexpr int kFactorDegreeCap = 24;

// Distinct-degree then equal-degree splitting.  The randomness source is
// seeded from the input coefficients, so outputs are bit-reproducible.
inline Factorization poly_factor(const Poly& f) {
  if (f.is_zero()) throw domain_error("poly_factor: zero polynomial");
  if (f.deg() > kFactorDegreeCap)
    throw capacity_error("poly_factor: degree beyond cap");
  const Field& fld = f.field();
  Factorization out;
  out.unit = f.lc();
  if (f.deg() == 0) return out;

  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
  for (FqElem c : f.coeffs()) seed = (seed ^ c) * 0xbf58476d1ce4e5b9ull;
  std::mt19937_64 rng(seed);

  std::vector<std::pair<Poly, int>> squarefree;
  detail::squarefree_decompose(f.make_monic(), 1, squarefree);

  for (const auto& [part, mult] : squarefree) {
    // distinct-degree: strip primes of degree d by gcd with x^(q^d) - x
    Poly rest = part;
    Poly xq = Poly::t(fld) % rest;
    for (int d = 1; rest.deg() > 0 && d <= rest.deg(); ++d) {
      xq = powmod(xq, BigInt(fld.q()), rest);
      if (2 * d > rest.deg()) break;
      Poly g = gcd(xq - Poly::t(fld), rest);
      if (g.deg() > 0) {
        std::vector<Poly> primes;
        detail::equal_degree_split(g, d, rng, primes);
        for (auto& pr : primes) out.factors.emplace_back(pr, mult);
        rest = rest / g;
        xq = xq % rest;
      }
    }
    if (rest.deg() > 0) out.factors.emplace_back(rest.make_monic(), mult);
  }

  std::sort(out.factors.begin(), out.factors.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  // merge repeated primes coming from distinct squarefree parts (cannot
  // happen for valid Yun output, but keeps the invariant obvious)
  std::vector<std::pair<Poly, int>> merged;
  for (auto& [pr, e] : out.factors) {
    if (!merged.empty() && merged.back().first == pr)
      merged.back().second += e;
    else
      merged.emplace_back(pr, e);
  }
  out.factors = std::move(merged);
  return out;
}

// number of monic divisors
inline std::uint64_t tau(const Poly& f) {
  auto fac = poly_factor(f);
  std::uint64_t r = 1;
  for (const auto& [pr, e] : fac.factors) r *= std::uint64_t(e) + 1;
  return r;
}

// number of distinct prime divisors
inline int omega(const Poly& f) {
  return int(poly_factor(f).factors.size());
}

// number of factorizations into k ordered monic factors:
// prod binom(e_i + k - 1, e_i)
inline BigInt tau_k(const Poly& f, int k) {
  if (k < 1) throw domain_error("tau_k: k must be >= 1");
  auto fac = poly_factor(f);
  BigInt r = 1;
  for (const auto& [pr, e] : fac.factors) {
    BigInt binom = 1;
    for (int i = 1; i <= e; ++i) {
      binom *= (e + k - 1 - (i - 1));
      binom /= i;
    }
    r *= binom;
  }
  return r;
}

struct ArithFunctions {
  std::uint64_t tau;
  int omega;
  Factorization factorization;
};

inline ArithFunctions arith_functions(const Poly& f) {
  if (f.is_zero()) throw domain_error("arith_functions: zero polynomial");
  ArithFunctions a;
  a.factorization = poly_factor(f);
  a.tau = 1;
  for (const auto& [pr, e] : a.factorization.factors)
    a.tau *= std::uint64_t(e) + 1;
  a.omega = int(a.factorization.factors.size());
  return a;
}

struct RDecomposition {
  std::vector<Poly> b;  // b_1 .. b_j
  std::vector<Poly> k;  // k_1 .. k_j
  Poly r_next;          // (j+1)-full tail r_{j+1}
};

// r = r_{j+1} * prod_{i<=j} k_i^i with (j+1)-full r_{j+1}
inline RDecomposition decompose_r(const Poly& r, int j) {
  if (r.is_zero()) throw domain_error("decompose_r: zero polynomial");
  if (j < 1) throw domain_error("decompose_r: j must be >= 1");
  const Field& f = r.field();
  auto fac = poly_factor(r);
  RDecomposition d;
  d.r_next = Poly::constant(f, fac.unit);
  for (int i = 1; i <= j; ++i) {
    d.b.push_back(fac.b(f, i));
    d.k.push_back(fac.k(f, i));
  }
  for (const auto& [pr, e] : fac.factors)
    if (e >= j + 1) d.r_next = d.r_next * pr.pow(unsigned(e));
  return d;
}

// Exhaustive list of monic irreducibles of degree d, in coefficient order.
inline std::vector<Poly> primes_of_degree(const Field& f, int d,
                                          std::uint64_t cap = 1u << 22) {
  if (d < 1) throw domain_error("primes_of_degree: d must be >= 1");
  std::uint64_t total = 1;
  for (int i = 0; i < d; ++i) {
    total *= f.q();
    if (total > cap)
      throw capacity_error("primes_of_degree: q^d beyond enumeration cap");
  }
  std::vector<Poly> out;
  for (const Poly& cand : all_monic_of_degree(f, d)) {
    if (d == 1) {
      out.push_back(cand);
      continue;
    }
    // Rabin irreducibility in F_q[t]
    Poly xq = Poly::t(f);
    for (int i = 0; i < d; ++i) xq = powmod(xq, BigInt(f.q()), cand);
    if (xq != Poly::t(f)) continue;  // both sides reduced mod cand, d >= 2
    bool ok = true;
    for (int l = 2; l <= d && ok; ++l) {
      if (d % l) continue;
      bool prime_l = true;
      for (int dd = 2; dd * dd <= l; ++dd)
        if (l % dd == 0) prime_l = false;
      if (!prime_l) continue;
      Poly xql = Poly::t(f);
      for (int i = 0; i < d / l; ++i) xql = powmod(xql, BigInt(f.q()), cand);
      if (gcd(xql - Poly::t(f), cand).deg() != 0) ok = false;
    }
    if (ok) out.push_back(cand);
  }
  return out;
}

// |a_d - q^d/d| <= q^(d/2)/d + q^(d/3); the left side is rational, the right
// side irrational for most d, so the comparison is done in long double with
// ample margin at desk scale.
struct PrimeCountCheck {
  std::uint64_t a_d;
  long double lhs;
  long double rhs;
  bool holds;
};

inline PrimeCountCheck prime_count_inequality(const Field& f, int d) {
  PrimeCountCheck c;
  c.a_d = primes_of_degree(f, d).size();
  long double qd = std::pow((long double)f.q(), (long double)d);
  c.lhs = std::fabs((long double)c.a_d - qd / d);
  c.rhs = std::pow((long double)f.q(), d / 2.0L) / d +
          std::pow((long double)f.q(), d / 3.0L);
  c.holds = c.lhs <= c.rhs;
  return c;
}

}  // namespace ffcm
