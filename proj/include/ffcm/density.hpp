#pragma once

#include <map>
#include <optional>

#include "ffcm/expsum.hpp"
#include "ffcm/geometry.hpp"

namespace ffcm {

// Truncated local density at a finite prime:
//   sum_{e=0}^{e_max} |prime|^{-en} S_{prime^e}(0),
// with the e >= 5 terms taken from the closed forms (branching on e mod 3)
// and small e from exact point counts.
struct LocalFactor {
  Poly prime;
  int e_max;
  Rational value;
  std::vector<Rational> terms;  // term e at index e
};

inline LocalFactor local_factor(const CubicForm& F, const Poly& prime,
                                int e_max, Budget& budget,
                                CountMode mode = CountMode::AUTO) {
  if (e_max < 0) throw domain_error("local_factor: e_max >= 0");
  const Field& f = F.field();
  LocalFactor out{prime, e_max, Rational(0), {}};
  BigInt pa = pow_big(BigInt(f.q()), unsigned(prime.deg()));
  for (int e = 0; e <= e_max; ++e) {
    BigInt s = e >= 5 ? local_sum_closed(F, prime, e, budget)
                      : local_sum_from_counts(F, prime, e, budget, mode);
    Rational term = Rational(s) / Rational(pow_big(pa, unsigned(e * F.n())));
    out.terms.push_back(term);
    out.value += term;
  }
  return out;
}

// termwise decay observation: |prime|^{-en} S_{prime^e}(0) against
// |prime|^{-2n+5} for e >= 5 (constant 1 on these cases)
struct LocalTermDecay {
  int e;
  Rational term_abs;
  Rational bound;
  bool within;
};

inline LocalTermDecay local_term_decay(const CubicForm& F, const Poly& prime,
                                       int e, Budget& budget) {
  if (e < 5) throw domain_error("local_term_decay: e >= 5");
  const Field& f = F.field();
  BigInt pa = pow_big(BigInt(f.q()), unsigned(prime.deg()));
  BigInt s = local_sum_closed(F, prime, e, budget);
  Rational term = Rational(s < 0 ? -s : s) /
                  Rational(pow_big(pa, unsigned(e * F.n())));
  Rational bound = Rational(pow_big(pa, 5)) /
                   Rational(pow_big(pa, unsigned(2 * F.n())));
  return {e, term, bound, term <= bound};
}

// The singular series, truncated to primes of degree <= deg_max and local
// exponents e <= e_max.  The t-factor is exact: the t-power sums vanish for
// K >= 2, so q^-n (1 + S_{t,t,a}(0)) = q^{-n+1}.
struct DensityReport {
  int n = 0;
  std::uint64_t q = 0;
  int deg_max = 0;
  int e_max = 0;
  Rational t_factor;
  std::vector<LocalFactor> local_factors;
  Rational S_truncated;          // t_factor * prod local factors
  Rational S_normalized;         // q^{n-1} * S_truncated, compared with 1
  Rational J;                    // singular integral q^{-(n-3)}
  Rational main_term(int d) const {
    return S_truncated * J * qpow(q, (long long)(d + 1) * (n - 3));
  }
};

inline Rational leading_term(int n, int d, std::uint64_t q) {
  return qpow(q, (long long)(d - 1) * n - (3 * d - 1));
}

inline Rational singular_integral(int n, std::uint64_t q) {
  if (n < 4) throw domain_error("singular_integral: n >= 4");
  return qpow(q, -(n - 3));
}

inline DensityReport singular_series(const CharContext& ctx,
                                     const CubicForm& F,
                                     const std::vector<FqElem>& a, int deg_max,
                                     int e_max, Budget& budget,
                                     CountMode mode = CountMode::AUTO) {
  const Field& f = *ctx.field;
  if (!f.theorem_mode())
    throw domain_error("singular_series: theorem_mode required");
  const int n = F.n();
  DensityReport rep;
  rep.n = n;
  rep.q = f.q();
  rep.deg_max = deg_max;
  rep.e_max = e_max;

  // t-factor assembled from the closed t-power sums
  CycInt s1 = s_tpower_closed(ctx, 1, a, F);
  rep.t_factor = qpow(f.q(), -n) * (Rational(1) + Rational(s1.rational_value()));
  // K >= 2 sums vanish; the closed value is q^{-n+1} exactly
  if (rep.t_factor != qpow(f.q(), -n + 1))
    throw domain_error("singular_series: t-factor mismatch");

  rep.S_truncated = rep.t_factor;
  // the local count at a prime depends only on deg(prime): O/prime is the
  // field with q^deg elements and F has constant coefficients
  std::map<int, LocalFactor> by_degree;
  Poly t = Poly::t(f);
  for (int deg = 1; deg <= deg_max; ++deg) {
    for (const Poly& prime : primes_of_degree(f, deg)) {
      if (prime == t) continue;
      auto it = by_degree.find(deg);
      if (it == by_degree.end()) {
        LocalFactor lf = local_factor(F, prime, e_max, budget, mode);
        it = by_degree.emplace(deg, lf).first;
      }
      LocalFactor lf = it->second;
      lf.prime = prime;
      rep.local_factors.push_back(lf);
      rep.S_truncated *= lf.value;
    }
  }
  rep.S_normalized = rep.S_truncated * qpow(f.q(), n - 1);
  rep.J = qpow(f.q(), -(n - 3));  // = singular_integral(n, q) for n >= 4
  return rep;
}

// Quadrature cross-check of the singular integral on a concrete form and
// marked point: q^3 polynomial parts phi = c2 t^2 + c1 t + c0 (the T-tail of
// phi cannot reach the t^-1 coefficient), each integrated over the window.
inline Rational singular_integral_quadrature(const CharContext& ctx,
                                             const CubicForm& F,
                                             const std::vector<FqElem>& b,
                                             int depth, Budget* budget = nullptr) {
  const Field& f = *ctx.field;
  const int n = F.n();
  LaurentRing ring{&f};
  ScaledCyc total = ScaledCyc::zero(ctx.p());
  std::vector<FqElem> pi(3, 0);
  for (std::uint64_t idx = 0; idx < std::uint64_t(f.q()) * f.q() * f.q();
       ++idx) {
    std::uint64_t v = idx;
    for (int i = 0; i < 3; ++i) {
      pi[std::size_t(i)] = FqElem(v % f.q());
      v /= f.q();
    }
    Laurent phi = Laurent::from_coeff_map(
        f, {{0, pi[0]}, {1, pi[1]}, {2, pi[2]}});
    auto integrand = [&](std::span<const Laurent> z) {
      std::vector<Laurent> u;
      for (int i = 0; i < n; ++i)
        u.push_back((Laurent::monomial(f, 0, b[std::size_t(i)]) +
                     z[std::size_t(i)])
                        .shifted(-1));
      Laurent Fu = F.eval_in(ring, std::span<const Laurent>(u));
      return psi_eval(ctx, phi * Fu);
    };
    ScaledCyc inner = haar_quadrature(ctx, n, depth, integrand, budget);
    // the window has measure q^-n around t^-1 b
    total = total.plus(ScaledCyc{inner.v, inner.qexp - n}, f.q());
  }
  return total.rational(f.q());
}

// Numeric profile of the dominance analysis: every exponent of q evaluated
// exactly as a rational.
struct BoundProfile {
  int n = 0;
  int d = 0;
  std::uint64_t q = 0;
  Frac Q;         // 3(d+1)/2
  int P_exp = 0;  // |P| = q^(d+1)
  long long mu = 0;
  Frac main_exp;
  Frac err1, err2, err3;
  bool main_dominates = false;
  std::optional<long long> d_min;  // ceil(19(n-1)/(n-9)); undefined off n >= 10

  Frac J_exp(long long Theta) const {
    Frac cand(Theta + 3ll * (d + 1), 1);
    return cand > Frac(0) ? cand : Frac(0);
  }
  Frac L_exp(long long Theta) const {
    Frac second = Frac(n) - Frac(n * Theta, 2) - Frac(3ll * n * (d + 1), 2);
    Frac first(-n);
    return first < second ? first : second;
  }
  Frac C_exp(long long Y, long long Theta, int B) const {
    return Frac(B + 1 + Y - (d + 1)) + J_exp(Theta);
  }
  // the nonempty-c-range condition q^Y >= |P| / (J(Theta) q^{B+1})
  bool c_range_nonempty(long long Y, long long Theta, int B) const {
    return Frac(Y) >= Frac(d + 1) - J_exp(Theta) - Frac(B + 1);
  }
};

inline BoundProfile bound_profile(int n, int d, std::uint64_t q) {
  BoundProfile bp;
  bp.n = n;
  bp.d = d;
  bp.q = q;
  bp.Q = Frac(3ll * (d + 1), 2);
  bp.P_exp = d + 1;
  bp.mu = (long long)(n - 3) * d - n;
  bp.main_exp = Frac((long long)(d - 1) * n - (3ll * d - 1));
  bp.err1 = Frac(5ll * (d + 2) * n, 6) - Frac(5ll * d + 16, 3);
  bp.err2 = Frac((5ll * d + 8) * n, 6) - Frac(3ll * d, 2) - Frac(14, 3);
  bp.err3 = Frac(3ll * (d + 5) * n, 4) - Frac(3ll * (d + 5), 4);
  Frac emax = std::max({bp.err1, bp.err2, bp.err3});
  bp.main_dominates = bp.main_exp > emax;
  if (n >= 10) {
    long long num = 19ll * (n - 1), den = n - 9;
    bp.d_min = (num + den - 1) / den;  // ceil
  }
  return bp;
}

}  // namespace ffcm
