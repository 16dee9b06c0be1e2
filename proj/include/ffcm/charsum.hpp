#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "ffcm/common.hpp"
#include "ffcm/cyclotomic.hpp"
#include "ffcm/laurent.hpp"

namespace ffcm {

// The additive character psi on K_inf: reads the t^-1 coefficient through
// Tr_{F_q/F_p} into an exact power of zeta_p.
struct CharContext {
  const Field* field;

  explicit CharContext(const Field& f) : field(&f) {}

  std::uint32_t p() const { return field->p(); }

  // exponent j with psi-value zeta^j, from a field element
  std::uint32_t zeta_exp(FqElem a) const { return field->trace(a); }

  CycInt psi_of_elem(FqElem a) const {
    return CycInt::zeta_pow(p(), zeta_exp(a));
  }
};

// psi(gamma) = zeta^Tr(a_{-1}); depends only on the t^-1 coefficient
inline CycInt psi_eval(const CharContext& ctx, const Laurent& gamma) {
  return ctx.psi_of_elem(gamma.coeff(-1));
}

// Sum of psi(gamma * b) over all b in O with |b| < q^N, by direct summation.
inline CycInt char_sum(const CharContext& ctx, const Laurent& gamma, int N) {
  if (N < 0) throw domain_error("char_sum: N must be >= 0");
  const Field& f = *ctx.field;
  // residue of gamma*b at t^-1 is sum_j b_j * gamma_{-1-j}; all the needed
  // gamma coefficients must be within precision
  std::vector<FqElem> w(static_cast<std::size_t>(N), 0);
  for (int j = 0; j < N; ++j) w[std::size_t(j)] = gamma.coeff(-1 - j);
  std::uint64_t total = 1;
  for (int j = 0; j < N; ++j) total *= f.q();
  ZetaCounter acc(ctx.p());
  std::vector<FqElem> b(std::size_t(N), 0);
  for (std::uint64_t idx = 0;; ++idx) {
    FqElem res = 0;
    for (int j = 0; j < N; ++j)
      res = f.add(res, f.mul(b[std::size_t(j)], w[std::size_t(j)]));
    acc.add(ctx.zeta_exp(res));
    // odometer
    int pos = 0;
    while (pos < N) {
      if (++b[std::size_t(pos)] < f.q()) break;
      b[std::size_t(pos)] = 0;
      ++pos;
    }
    if (pos == N) break;
  }
  return acc.value();
}

// Closed form of the orthogonality sum.  The sum depends on gamma only
// through gamma mod O, so the test reads the fractional part: it equals q^N
// exactly when the coefficients of gamma at t^-1 .. t^-N all vanish, else 0.
inline Rational char_sum_closed(const Laurent& gamma, int N) {
  if (N < 0) throw domain_error("char_sum_closed: N must be >= 0");
  const Field& f = gamma.field();
  for (int j = 1; j <= N; ++j)
    if (gamma.coeff(-j) != 0) return Rational(0);
  return qpow(f.q(), N);
}

// integral over |alpha| < q^Y of psi(alpha * gamma): q^Y iff |gamma| < q^-Y
inline Rational theta_integral_closed(const Laurent& gamma, int Y) {
  const Field& f = gamma.field();
  // |gamma| < q^-Y iff no nonzero coefficient at exponent >= -Y; certifying
  // that needs precision down to -Y
  for (int e = gamma.top(); e >= -Y; --e) {
    if (e < gamma.precision_floor())
      throw truncation_error("theta_integral_closed: undecidable at depth");
    if (gamma.coeff(e) != 0) return Rational(0);
  }
  if (gamma.known_zero() && gamma.precision_floor() > -Y)
    throw truncation_error("theta_integral_closed: undecidable at depth");
  return qpow(f.q(), Y);
}

// D such that psi(theta * P^3 * F(u) + linear), restricted to the weight
// window, depends only on the window digits at exponents >= -D.  The cubic
// part exposes digit z_{-j} at exponent top(theta*P^3) - 3 - j + 3, reaching
// t^-1 only for j <= top - 2.  Conservative overestimates are fine.
inline int depth_bound(int max_poly_degree, int theta_valuation) {
  int d = theta_valuation + max_poly_degree - 2;
  return d < 1 ? 1 : d;
}

// Exact Haar quadrature over T^n at depth D: q^{-nD} times the sum of the
// integrand over all q^{nD} digit grids.  Points carry precision floor -D, so
// an integrand that actually depends on deeper digits raises truncation_error
// instead of silently integrating a truncation.
inline ScaledCyc haar_quadrature(
    const CharContext& ctx, int n, int D,
    const std::function<CycInt(std::span<const Laurent>)>& integrand,
    Budget* budget = nullptr, unsigned workers = 1) {
  if (n < 1 || D < 1) throw domain_error("haar_quadrature: need n, D >= 1");
  const Field& f = *ctx.field;
  std::uint64_t per_coord = 1;
  for (int i = 0; i < D; ++i) {
    per_coord *= f.q();
    if (per_coord > (1ull << 40)) throw capacity_error("haar_quadrature: depth");
  }
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) {
    if (total > (1ull << 34) / per_coord)
      throw capacity_error("haar_quadrature: q^{nD} beyond cap");
    total *= per_coord;
  }
  if (budget) {
    budget->precheck(total, "haar_quadrature");
    budget->charge(total);
  }

  auto block = [&](std::uint64_t lo, std::uint64_t hi) {
    CycInt acc = CycInt::zero(ctx.p());
    std::vector<Laurent> z(std::size_t(n), Laurent::zero(f));
    std::map<int, FqElem> digits;
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      std::uint64_t v = idx;
      for (int i = 0; i < n; ++i) {
        digits.clear();
        for (int j = 1; j <= D; ++j) {
          FqElem c = FqElem(v % f.q());
          v /= f.q();
          if (c) digits[-j] = c;
        }
        z[std::size_t(i)] = Laurent::from_coeff_map(f, digits, -D);
      }
      acc += integrand(std::span<const Laurent>(z));
    }
    return acc;
  };
  CycInt sum = parallel_blocks<CycInt>(
      total, workers, block,
      [](CycInt& a, const CycInt& b) { a += b; }, CycInt::zero(ctx.p()));
  return ScaledCyc{sum, -static_cast<long long>(n) * D};
}

}  // namespace ffcm
