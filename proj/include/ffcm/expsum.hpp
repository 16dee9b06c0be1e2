#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "ffcm/charsum.hpp"
#include "ffcm/cubic_form.hpp"
#include "ffcm/factor.hpp"

namespace ffcm {

// The complete exponential sum
//   S_{r,M,a}(c) = sum*_{|alpha|<|r|} sum_{|y|<|r_M|, y = a mod M}
//                    psi(alpha F(y)/r) psi(-c.y/r_M)
// with M in {1, t} and r_M = rM/(r,M).  The starred sum restricts the scalar
// numerator alpha to (alpha, r) = 1.
struct ExpSumSpec {
  Poly r;
  Poly M;
  std::vector<FqElem> a;
  std::vector<Poly> c;
};

inline void validate_spec(const ExpSumSpec& spec, const CubicForm& F) {
  const Field& f = F.field();
  if (spec.r.is_zero() || !spec.r.is_monic())
    throw domain_error("expsum: r must be monic nonzero");
  if (spec.M != Poly::one(f) && spec.M != Poly::t(f))
    throw domain_error("expsum: M must be 1 or t");
  if (int(spec.a.size()) != F.n() || int(spec.c.size()) != F.n())
    throw domain_error("expsum: dimension mismatch");
}

inline Poly r_M(const ExpSumSpec& spec) {
  Poly g = gcd(spec.r, spec.M);
  return (spec.r * spec.M) / g;
}

// all residues alpha with |alpha| < |r| and (alpha, r) = 1, by gcd filtering
inline std::vector<Poly> unit_residues(const Poly& r) {
  const Field& f = r.field();
  std::vector<Poly> out;
  int m = r.deg();
  std::uint64_t total = 1;
  for (int i = 0; i < m; ++i) total *= f.q();
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t v = idx;
    std::vector<FqElem> coef(std::size_t(std::max(m, 1)), 0);
    for (int i = 0; i < m; ++i) {
      coef[std::size_t(i)] = FqElem(v % f.q());
      v /= f.q();
    }
    Poly alpha(f, coef);
    if (gcd(alpha, r).deg() == 0) out.push_back(alpha);
  }
  return out;
}

namespace detail {

// fixed-size residue arithmetic mod a monic r, on raw coefficient buffers;
// the _into variants write preallocated buffers so the enumeration kernels
// run allocation-free per step
struct ResidueCtx {
  const Field* f;
  std::vector<FqElem> r;  // coefficients of r, length m+1, monic
  int m;
  mutable std::vector<FqElem> scratch_;

  explicit ResidueCtx(const Poly& rp)
      : f(&rp.field()), r(rp.coeffs()), m(rp.deg()),
        scratch_(std::size_t(std::max(2 * m, 1)), 0) {}

  // h <- t*h mod r (h has length m)
  void shift_reduce(std::vector<FqElem>& h) const {
    if (m == 0) return;
    FqElem top = h[std::size_t(m - 1)];
    for (int i = m - 1; i > 0; --i) h[std::size_t(i)] = h[std::size_t(i - 1)];
    h[0] = 0;
    if (top)
      for (int i = 0; i < m; ++i)
        h[std::size_t(i)] =
            f->sub(h[std::size_t(i)], f->mul(top, r[std::size_t(i)]));
  }
  // fold a raw little-endian buffer (any length) down to length max(m,1)
  void reduce_raw_into(std::vector<FqElem>& out,
                       const std::vector<FqElem>& src) const {
    out.assign(std::size_t(std::max(m, 1)), 0);
    if (m == 0) return;
    scratch_.assign(std::max(src.size(), std::size_t(m)), 0);
    std::copy(src.begin(), src.end(), scratch_.begin());
    for (int i = int(scratch_.size()) - 1; i >= m; --i) {
      FqElem c = scratch_[std::size_t(i)];
      if (!c) continue;
      scratch_[std::size_t(i)] = 0;
      for (int j = 0; j < m; ++j)
        scratch_[std::size_t(i - m + j)] = f->sub(
            scratch_[std::size_t(i - m + j)], f->mul(c, r[std::size_t(j)]));
    }
    std::copy_n(scratch_.begin(), m, out.begin());
  }
  // out <- a * b mod r for reduced residues a, b (out distinct from both)
  void mul_reduced_into(std::vector<FqElem>& out, const std::vector<FqElem>& a,
                        const std::vector<FqElem>& b) const {
    if (m == 0) {
      out.assign(1, 0);
      return;
    }
    scratch_.assign(std::size_t(2 * m), 0);
    for (int i = 0; i < m; ++i) {
      FqElem ai = a[std::size_t(i)];
      if (!ai) continue;
      for (int j = 0; j < m; ++j)
        scratch_[std::size_t(i + j)] = f->add(
            scratch_[std::size_t(i + j)], f->mul(ai, b[std::size_t(j)]));
    }
    // fold the top m-1 coefficients down
    out.assign(std::size_t(m), 0);
    for (int i = 2 * m - 2; i >= m; --i) {
      FqElem c = scratch_[std::size_t(i)];
      if (!c) continue;
      scratch_[std::size_t(i)] = 0;
      for (int j = 0; j < m; ++j)
        scratch_[std::size_t(i - m + j)] = f->sub(
            scratch_[std::size_t(i - m + j)], f->mul(c, r[std::size_t(j)]));
    }
    std::copy_n(scratch_.begin(), m, out.begin());
  }
  std::vector<FqElem> mul_reduced(const std::vector<FqElem>& a,
                                  const std::vector<FqElem>& b) const {
    std::vector<FqElem> out;
    mul_reduced_into(out, a, b);
    if (out.empty()) out.assign(1, 0);
    return out;
  }
  std::vector<FqElem> reduce(const Poly& p) const {
    std::vector<FqElem> out;
    reduce_raw_into(out, p.coeffs());
    return out;
  }
};

// p-bin circular convolution of trace histograms (zeta^p = 1)
inline void conv_into(std::vector<std::int64_t>& acc,
                      const std::vector<std::int64_t>& h, std::uint32_t p) {
  std::vector<std::int64_t> out(p, 0);
  for (std::uint32_t i = 0; i < p; ++i) {
    if (!acc[i]) continue;
    for (std::uint32_t j = 0; j < p; ++j)
      if (h[j]) out[(i + j) % p] += acc[i] * h[j];
  }
  acc = std::move(out);
}

}  // namespace detail

// Direct summation of the displayed double sum.  The y-sum is enumerated by
// an odometer over free coefficients with incremental residue state; for a
// fixed y, the summand's psi-argument is F_q-linear in the numerator alpha,
//   res(alpha F(y)/r) = sum_j alpha_j w_j(y),  w_j = top coeff of t^j F(y) mod r,
// so the starred alpha-sum is tallied from those weights: through the unit
// list (gcd filtering) for composite r, or through per-digit trace histograms
// when r is a prime power and the unit set factors over base-prime digits.
// Both tallies add up the same q^... psi-terms, exactly.
inline CycInt s_naive(const CharContext& ctx, const ExpSumSpec& spec,
                      const CubicForm& F, Budget& budget, unsigned workers = 1,
                      bool force_generic_units = false) {
  validate_spec(spec, F);
  const Field& f = *ctx.field;
  const std::uint32_t q = f.q();
  const int n = F.n();
  const Poly rm = r_M(spec);
  const int m = rm.deg();     // y residue length
  const int mr = spec.r.deg();  // numerator length
  const bool congruence = spec.M.deg() == 1;  // M = t
  const int lowpos = congruence ? 1 : 0;
  const int freepos = m - lowpos;  // free coefficient slots per coordinate

  // prime-power structure of r decides the alpha-tally strategy
  auto fac = poly_factor(spec.r);
  const bool prime_power = !force_generic_units && fac.factors.size() == 1;
  std::vector<Poly> units;
  std::uint64_t unit_count = 1;
  if (mr > 0) {
    if (prime_power) {
      const auto& [pr, e] = fac.factors[0];
      std::uint64_t qd = 1;
      for (int i = 0; i < pr.deg(); ++i) qd *= q;
      unit_count = 1;
      for (int i = 0; i < e; ++i) unit_count *= qd;
      unit_count -= unit_count / qd;  // q^(eD) - q^((e-1)D)
    } else {
      units = unit_residues(spec.r);
      unit_count = units.size();
    }
  } else if (!prime_power || fac.factors.empty()) {
    units = {Poly::zero(f)};  // r = 1: alpha = 0 only
    unit_count = 1;
  }

  std::uint64_t total_y = 1;
  for (int i = 0; i < n * std::max(freepos, 0); ++i) {
    if (total_y > (1ull << 62) / q) throw capacity_error("s_naive: y space");
    total_y *= q;
  }
  std::uint64_t work = total_y;
  if (work > (1ull << 62) / std::max<std::uint64_t>(unit_count, 1))
    throw capacity_error("s_naive: work overflow");
  work *= std::max<std::uint64_t>(unit_count, 1);
  budget.precheck(work, "s_naive");
  budget.charge(work);

  detail::ResidueCtx rc(spec.r);
  detail::ResidueCtx rmc(rm);

  // c reduced mod r_M, and the shift table t^j * c_i mod r_M
  std::vector<std::vector<FqElem>> shiftc(std::size_t(n) *
                                          std::size_t(std::max(m, 1)));
  for (int i = 0; i < n; ++i) {
    std::vector<FqElem> ci = rmc.reduce(spec.c[std::size_t(i)]);
    for (int j = 0; j < std::max(m, 1); ++j) {
      shiftc[std::size_t(i * std::max(m, 1) + j)] = ci;
      rmc.shift_reduce(ci);
    }
  }

  // prime-power digit data
  int prime_deg = 0, prime_e = 0;
  std::vector<FqElem> prime_coeffs;
  if (prime_power && mr > 0) {
    prime_deg = fac.factors[0].first.deg();
    prime_e = fac.factors[0].second;
    prime_coeffs = rc.reduce(fac.factors[0].first);
  }
  // generic unit coefficient arrays
  std::vector<std::vector<FqElem>> unit_coeffs;
  if (!prime_power || mr == 0) {
    for (const auto& u : units) {
      std::vector<FqElem> cc(std::size_t(std::max(mr, 1)), 0);
      for (int j = 0; j < mr; ++j) cc[std::size_t(j)] = u.coeff(j);
      unit_coeffs.push_back(cc);
    }
  }

  const bool diagonal = F.is_diagonal();
  std::vector<FqElem> diag_coeff(std::size_t(n), 0);
  if (diagonal)
    for (const auto& mo : F.monomials()) diag_coeff[std::size_t(mo.i)] = mo.c;

  const std::uint32_t p = ctx.p();
  const std::uint64_t qD = [&] {
    std::uint64_t v = 1;
    for (int i = 0; i < prime_deg; ++i) v *= q;
    return v;
  }();

  auto block = [&](std::uint64_t lo, std::uint64_t hi) {
    // per-block residue context: the scratch buffer is not shareable
    detail::ResidueCtx rc(spec.r);
    ZetaCounter acc(p);
    if (lo >= hi) return acc;
    // y coefficient state
    std::vector<std::vector<FqElem>> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      y[std::size_t(i)].assign(std::size_t(std::max(m, 1)), 0);
      if (congruence && m > 0) y[std::size_t(i)][0] = spec.a[std::size_t(i)];
    }
    std::vector<FqElem> digits(std::size_t(n * std::max(freepos, 0)), 0);
    {
      std::uint64_t v = lo;
      for (std::size_t s = 0; s < digits.size(); ++s) {
        digits[s] = FqElem(v % q);
        v /= q;
        int i = int(s) / std::max(freepos, 1);
        int jpos = lowpos + int(s) % std::max(freepos, 1);
        y[std::size_t(i)][std::size_t(jpos)] = digits[s];
      }
    }
    // c.y mod r_M
    std::vector<FqElem> cdot(std::size_t(std::max(m, 1)), 0);
    auto add_scaled = [&](std::vector<FqElem>& dst,
                          const std::vector<FqElem>& src, FqElem sc) {
      if (!sc) return;
      for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = f.add(dst[i], f.mul(sc, src[i]));
    };
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        add_scaled(cdot, shiftc[std::size_t(i * std::max(m, 1) + j)],
                   y[std::size_t(i)][std::size_t(j)]);
    // F(y) mod r: per-coordinate cubes for diagonal forms
    std::vector<std::vector<FqElem>> cube(static_cast<std::size_t>(n));
    std::vector<FqElem> gsum(std::size_t(std::max(mr, 1)), 0);
    std::vector<FqElem> cube_yi, cube_sq, cube_out;
    auto coord_cube = [&](int i) -> const std::vector<FqElem>& {
      rc.reduce_raw_into(cube_yi, y[std::size_t(i)]);
      rc.mul_reduced_into(cube_sq, cube_yi, cube_yi);
      rc.mul_reduced_into(cube_out, cube_sq, cube_yi);
      if (cube_out.empty()) cube_out.assign(1, 0);
      for (auto& cc : cube_out) cc = f.mul(cc, diag_coeff[std::size_t(i)]);
      return cube_out;
    };
    auto full_g = [&]() {
      std::vector<Poly> yp;
      for (int i = 0; i < n; ++i) yp.emplace_back(f, y[std::size_t(i)]);
      return rc.reduce(F.eval(std::span<const Poly>(yp)));
    };
    if (diagonal && mr > 0) {
      std::fill(gsum.begin(), gsum.end(), 0);
      for (int i = 0; i < n; ++i) {
        cube[std::size_t(i)] = coord_cube(i);
        for (int l = 0; l < mr; ++l)
          gsum[std::size_t(l)] =
              f.add(gsum[std::size_t(l)], cube[std::size_t(i)][std::size_t(l)]);
      }
    } else if (mr > 0) {
      gsum = full_g();
    }

    std::vector<std::int64_t> conv(p), hist(p);
    // per digit i, weights v_{i,l}; preallocated, rows reused
    std::vector<std::vector<FqElem>> vtab(
        std::size_t(std::max(prime_e, 0)),
        std::vector<FqElem>(std::size_t(std::max(prime_deg, 1)), 0));
    std::vector<FqElem> h_i, sh, h_tmp;
    std::vector<FqElem> w(std::size_t(std::max(mr, 1)), 0);

    for (std::uint64_t idx = lo;; ++idx) {
      // ---- tally the alpha-sum for the current y ----
      FqElem res_c = m > 0 ? f.neg(cdot[std::size_t(m - 1)]) : 0;
      std::uint32_t phase = ctx.zeta_exp(res_c);
      if (mr == 0) {
        acc.add(phase);
      } else if (prime_power) {
        // weights v_{i,l} = top coeff of t^l prime^i F(y) mod r
        h_i = gsum;
        for (int i = 0; i < prime_e; ++i) {
          sh = h_i;
          auto& row = vtab[std::size_t(i)];
          for (int l = 0; l < prime_deg; ++l) {
            row[std::size_t(l)] = sh[std::size_t(mr - 1)];
            if (l + 1 < prime_deg) rc.shift_reduce(sh);
          }
          if (i + 1 < prime_e) {
            rc.mul_reduced_into(h_tmp, h_i, prime_coeffs);
            h_i.swap(h_tmp);
          }
        }
        std::fill(conv.begin(), conv.end(), 0);
        conv[0] = 1;
        for (int i = 0; i < prime_e; ++i) {
          bool zero_form = true;
          for (FqElem v : vtab[std::size_t(i)])
            if (v) zero_form = false;
          std::fill(hist.begin(), hist.end(), 0);
          if (zero_form)
            hist[0] = std::int64_t(qD);
          else
            for (std::uint32_t s = 0; s < p; ++s)
              hist[s] = std::int64_t(qD / p);
          if (i == 0) hist[0] -= 1;  // drop d_0 = 0: units need d_0 != 0
          detail::conv_into(conv, hist, p);
        }
        for (std::uint32_t s = 0; s < p; ++s)
          if (conv[s]) acc.add((s + phase) % p, conv[s]);
      } else {
        // generic unit loop over gcd-filtered residues
        sh = gsum;
        for (int j = 0; j < mr; ++j) {
          w[std::size_t(j)] = sh[std::size_t(mr - 1)];
          if (j + 1 < mr) rc.shift_reduce(sh);
        }
        for (const auto& u : unit_coeffs) {
          FqElem res = res_c;
          for (int j = 0; j < mr; ++j)
            res = f.add(res, f.mul(u[std::size_t(j)], w[std::size_t(j)]));
          acc.add(ctx.zeta_exp(res));
        }
      }

      if (idx + 1 >= hi) break;
      // ---- odometer step ----
      std::size_t s = 0;
      for (;; ++s) {
        int i = int(s) / std::max(freepos, 1);
        int jpos = lowpos + int(s) % std::max(freepos, 1);
        FqElem old = digits[s];
        FqElem next = old + 1 == q ? 0 : old + 1;
        digits[s] = next;
        y[std::size_t(i)][std::size_t(jpos)] = next;
        // cdot update: delta * t^jpos c_i
        FqElem delta = f.sub(next, old);
        add_scaled(cdot, shiftc[std::size_t(i * std::max(m, 1) + jpos)], delta);
        if (diagonal && mr > 0) {
          const auto& fresh = coord_cube(i);
          for (int l = 0; l < mr; ++l)
            gsum[std::size_t(l)] =
                f.add(f.sub(gsum[std::size_t(l)],
                            cube[std::size_t(i)][std::size_t(l)]),
                      fresh[std::size_t(l)]);
          cube[std::size_t(i)].assign(fresh.begin(), fresh.end());
        }
        if (next != 0) break;
      }
      if (!diagonal && mr > 0) gsum = full_g();
    }
    return acc;
  };

  ZetaCounter total = parallel_blocks<ZetaCounter>(
      total_y, resolve_workers(workers), block,
      [](ZetaCounter& a, const ZetaCounter& b) { a.add_counter(b); },
      ZetaCounter(p));
  return total.value();
}

// t-power sums with M = t at a zero a of F with nonvanishing gradient:
// S_{t,t,a}(0) = q - 1 and S_{t^K,t,a}(0) = 0 for K >= 2.
inline CycInt s_tpower_closed(const CharContext& ctx, int K,
                              const std::vector<FqElem>& a,
                              const CubicForm& F) {
  if (K < 1) throw domain_error("s_tpower_closed: K >= 1");
  if (int(a.size()) != F.n()) throw domain_error("s_tpower_closed: dimension");
  const Field& f = *ctx.field;
  if (F.eval(std::span<const FqElem>(a)) != 0)
    throw domain_error("s_tpower_closed: F(a) = 0 required");
  auto g = F.gradient(std::span<const FqElem>(a));
  bool grad_zero = true;
  for (FqElem gi : g)
    if (gi) grad_zero = false;
  if (grad_zero)
    throw domain_error("s_tpower_closed: grad F(a) != 0 required");
  if (K == 1) return CycInt::from_int(ctx.p(), BigInt(f.q()) - 1);
  return CycInt::zero(ctx.p());
}

enum class CountMode { AUTO, DIRECT, RECURSIVE };

struct S0S1 {
  BigInt s0;
  BigInt s1;
};

// S_0(prime^e) = #{x mod prime^e : F(x) = 0 mod prime^e},
// S_1 additionally requires prime not dividing x.  The recursion mode uses
//   S_0 = S_1 + |prime|^{2n} S_0(prime^{e-3})   for e >= 4,
//   S_0 = S_1 + |prime|^{(e-1)n}                for 1 <= e <= 3,
//   S_1(prime^{e+1}) = |prime|^{n-1} S_1(prime^e),
// valid since F is smooth modulo every prime.
inline S0S1 count_S0_S1(const CubicForm& F, const Poly& prime, int e,
                        Budget& budget, CountMode mode = CountMode::AUTO,
                        unsigned workers = 1) {
  if (e < 0) throw domain_error("count_S0_S1: e >= 0");
  const Field& f = F.field();
  const std::uint32_t q = f.q();
  const int n = F.n();
  const int D = prime.deg();
  if (e == 0) return {BigInt(1), BigInt(0)};

  auto direct_cost = [&](int ee) {
    long double c = 1;
    for (int i = 0; i < n * ee * D; ++i) c *= q;
    return c;
  };
  bool use_direct = mode == CountMode::DIRECT ||
                    (mode == CountMode::AUTO && direct_cost(e) <= 2e7);

  if (!use_direct && mode != CountMode::DIRECT) {
    // recursion off a direct field-level count
    S0S1 base = count_S0_S1(F, prime, 1, budget, CountMode::DIRECT, workers);
    BigInt prime_abs = pow_big(BigInt(q), unsigned(D));
    BigInt s1 = base.s1;
    std::vector<BigInt> s0(std::size_t(e) + 1);
    std::vector<BigInt> s1v(std::size_t(e) + 1);
    s0[0] = 1;
    s1v[0] = 0;
    s1v[1] = base.s1;
    s0[1] = base.s0;
    BigInt lift = pow_big(prime_abs, unsigned(n - 1));
    for (int ee = 2; ee <= e; ++ee) {
      s1v[std::size_t(ee)] = s1v[std::size_t(ee - 1)] * lift;
      if (ee <= 3)
        s0[std::size_t(ee)] = s1v[std::size_t(ee)] +
                              pow_big(prime_abs, unsigned((ee - 1) * n));
      else
        s0[std::size_t(ee)] = s1v[std::size_t(ee)] +
                              pow_big(prime_abs, unsigned(2 * n)) *
                                  s0[std::size_t(ee - 3)];
    }
    return {s0[std::size_t(e)], s1v[std::size_t(e)]};
  }

  // direct enumeration over (O/prime^e)^n
  const int mlen = e * D;
  std::uint64_t total = 1;
  for (int i = 0; i < n * mlen; ++i) {
    if (total > (1ull << 62) / q) throw capacity_error("count_S0_S1: space");
    total *= q;
  }
  budget.precheck(total, "count_S0_S1 direct");
  budget.charge(total);
  Poly modulus = prime.pow(unsigned(e));
  const bool diagonal = F.is_diagonal();
  std::vector<FqElem> diag_coeff(std::size_t(n), 0);
  if (diagonal)
    for (const auto& mo : F.monomials()) diag_coeff[std::size_t(mo.i)] = mo.c;

  struct Counts {
    BigInt s0 = 0, s1 = 0;
  };
  auto block = [&](std::uint64_t lo, std::uint64_t hi) {
    detail::ResidueCtx rc(modulus);  // per-block scratch
    Counts cnt;
    if (lo >= hi) return cnt;
    std::vector<std::vector<FqElem>> x(static_cast<std::size_t>(n));
    std::vector<FqElem> digits(std::size_t(n * mlen), 0);
    for (int i = 0; i < n; ++i)
      x[std::size_t(i)].assign(std::size_t(mlen), 0);
    {
      std::uint64_t v = lo;
      for (std::size_t s = 0; s < digits.size(); ++s) {
        digits[s] = FqElem(v % q);
        v /= q;
        x[s / std::size_t(mlen)][s % std::size_t(mlen)] = digits[s];
      }
    }
    std::vector<std::vector<FqElem>> cube(static_cast<std::size_t>(n));
    std::vector<FqElem> gsum(std::size_t(mlen), 0);
    std::vector<FqElem> cube_sq, cube_out;
    auto coord_cube = [&](int i) -> const std::vector<FqElem>& {
      auto& xi = x[std::size_t(i)];
      rc.mul_reduced_into(cube_sq, xi, xi);
      rc.mul_reduced_into(cube_out, cube_sq, xi);
      for (auto& cc : cube_out) cc = f.mul(cc, diag_coeff[std::size_t(i)]);
      return cube_out;
    };
    auto refresh = [&]() {
      if (diagonal) {
        std::fill(gsum.begin(), gsum.end(), 0);
        for (int i = 0; i < n; ++i) {
          cube[std::size_t(i)] = coord_cube(i);
          for (int l = 0; l < mlen; ++l)
            gsum[std::size_t(l)] = f.add(gsum[std::size_t(l)],
                                         cube[std::size_t(i)][std::size_t(l)]);
        }
      } else {
        std::vector<Poly> xp;
        for (int i = 0; i < n; ++i) xp.emplace_back(f, x[std::size_t(i)]);
        gsum = rc.reduce(F.eval(std::span<const Poly>(xp)));
      }
    };
    refresh();
    detail::ResidueCtx pc(prime);
    for (std::uint64_t idx = lo;; ++idx) {
      bool zero = true;
      for (int l = 0; l < mlen; ++l)
        if (gsum[std::size_t(l)]) {
          zero = false;
          break;
        }
      if (zero) {
        cnt.s0 += 1;
        // prime | x componentwise?
        bool divisible = true;
        for (int i = 0; i < n && divisible; ++i) {
          auto red = pc.reduce(Poly(f, x[std::size_t(i)]));
          for (FqElem cc : red)
            if (cc) divisible = false;
        }
        if (!divisible) cnt.s1 += 1;
      }
      if (idx + 1 >= hi) break;
      std::size_t s = 0;
      for (;; ++s) {
        FqElem old = digits[s];
        FqElem next = old + 1 == q ? 0 : old + 1;
        digits[s] = next;
        x[s / std::size_t(mlen)][s % std::size_t(mlen)] = next;
        if (diagonal) {
          int i = int(s) / mlen;
          const auto& fresh = coord_cube(i);
          for (int l = 0; l < mlen; ++l)
            gsum[std::size_t(l)] =
                f.add(f.sub(gsum[std::size_t(l)],
                            cube[std::size_t(i)][std::size_t(l)]),
                      fresh[std::size_t(l)]);
          cube[std::size_t(i)].assign(fresh.begin(), fresh.end());
        }
        if (next != 0) break;
      }
      if (!diagonal) refresh();
    }
    return cnt;
  };
  Counts total_cnt = parallel_blocks<Counts>(
      total, resolve_workers(workers), block,
      [](Counts& a, const Counts& b) {
        a.s0 += b.s0;
        a.s1 += b.s1;
      },
      Counts{});
  return {total_cnt.s0, total_cnt.s1};
}

// local sum S_{prime^e}(0) = |prime|^e S_0(prime^e) - |prime|^{e-1+n} S_0(prime^{e-1})
inline BigInt local_sum_from_counts(const CubicForm& F, const Poly& prime,
                                    int e, Budget& budget,
                                    CountMode mode = CountMode::AUTO) {
  if (e == 0) return BigInt(1);
  const Field& f = F.field();
  BigInt prime_abs = pow_big(BigInt(f.q()), unsigned(prime.deg()));
  BigInt s0e = count_S0_S1(F, prime, e, budget, mode).s0;
  BigInt s0e1 = count_S0_S1(F, prime, e - 1, budget, mode).s0;
  return pow_big(prime_abs, unsigned(e)) * s0e -
         pow_big(prime_abs, unsigned(e - 1 + F.n())) * s0e1;
}

// closed forms for e = 3k + l >= 5, in terms of S_1(prime) only
inline BigInt local_sum_closed(const CubicForm& F, const Poly& prime, int e,
                               Budget& budget) {
  if (e < 5) throw domain_error("local_sum_closed: e >= 5");
  const Field& f = F.field();
  const int n = F.n();
  BigInt pa = pow_big(BigInt(f.q()), unsigned(prime.deg()));
  int k = e / 3, l = e % 3;
  BigInt scale = pow_big(pa, unsigned(e)) * pow_big(pa, unsigned(2 * n * k));
  if (l == 0) {
    // |prime|^{e+2nk} (1 - |prime|^{-1}); keep it integral
    return pow_big(pa, unsigned(e - 1)) * pow_big(pa, unsigned(2 * n * k)) *
           (pa - 1);
  }
  if (l == 1) {
    BigInt s1 = count_S0_S1(F, prime, 1, budget, CountMode::DIRECT).s1;
    return scale * (s1 + 1 - pow_big(pa, unsigned(n - 1)));
  }
  return scale * (pow_big(pa, unsigned(n)) - pow_big(pa, unsigned(n - 1)));
}

// rank of H(x) over the residue field O/prime
inline int hessian_rank_mod_prime(const CubicForm& F,
                                  std::span<const Poly> x, const Poly& prime) {
  const Field& f = F.field();
  const int n = F.n();
  PolyRing ring{&f};
  auto h = F.hessian_matrix(ring, x);
  // gaussian elimination over O/prime
  std::vector<Poly> a;
  a.reserve(h.size());
  for (const auto& entry : h) a.push_back(entry % prime);
  int rank = 0;
  for (int col = 0; col < n && rank < n; ++col) {
    int piv = -1;
    for (int r = rank; r < n; ++r)
      if (!a[std::size_t(r * n + col)].is_zero()) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    for (int c = 0; c < n; ++c)
      std::swap(a[std::size_t(piv * n + c)], a[std::size_t(rank * n + c)]);
    Poly inv = inv_mod(a[std::size_t(rank * n + col)], prime);
    for (int r = rank + 1; r < n; ++r) {
      Poly fac = mulmod(a[std::size_t(r * n + col)], inv, prime);
      if (fac.is_zero()) continue;
      for (int c = col; c < n; ++c)
        a[std::size_t(r * n + c)] =
            (a[std::size_t(r * n + c)] -
             fac * a[std::size_t(rank * n + c)] % prime) %
            prime;
    }
    ++rank;
  }
  return rank;
}

// N_d(x) = #{y mod d : H(x) y = 0 mod d} for squarefree d,
// equal to prod over primes of |prime|^{n - rank(H(x) mod prime)}
inline BigInt hessian_kernel_count(const CubicForm& F, std::span<const Poly> x,
                                   const Poly& d, Budget& budget,
                                   bool direct = false) {
  const Field& f = F.field();
  const int n = F.n();
  if (d.is_zero()) throw domain_error("hessian_kernel_count: d = 0");
  auto fac = poly_factor(d);
  for (const auto& [pr, e] : fac.factors)
    if (e > 1) throw domain_error("hessian_kernel_count: d must be squarefree");
  if (d.deg() == 0) return BigInt(1);

  if (direct) {
    std::uint64_t total = 1;
    for (int i = 0; i < n * d.deg(); ++i) {
      if (total > (1ull << 40))
        throw capacity_error("hessian_kernel_count: direct space");
      total *= f.q();
    }
    budget.precheck(total, "hessian_kernel_count direct");
    budget.charge(total);
    PolyRing ring{&f};
    auto h = F.hessian_matrix(ring, x);
    BigInt count = 0;
    std::vector<FqElem> digits(std::size_t(n * d.deg()), 0);
    for (std::uint64_t idx = 0;; ++idx) {
      std::vector<Poly> y;
      for (int i = 0; i < n; ++i) {
        std::vector<FqElem> c(std::size_t(d.deg()), 0);
        for (int j = 0; j < d.deg(); ++j)
          c[std::size_t(j)] = digits[std::size_t(i * d.deg() + j)];
        y.emplace_back(f, c);
      }
      bool kernel = true;
      for (int r = 0; r < n && kernel; ++r) {
        Poly acc = Poly::zero(f);
        for (int c = 0; c < n; ++c)
          acc = acc + h[std::size_t(r * n + c)] * y[std::size_t(c)];
        if (!(acc % d).is_zero()) kernel = false;
      }
      if (kernel) count += 1;
      std::size_t s = 0;
      for (; s < digits.size(); ++s) {
        if (++digits[s] < f.q()) break;
        digits[s] = 0;
      }
      if (s == digits.size()) break;
    }
    return count;
  }

  BigInt out = 1;
  for (const auto& [pr, e] : fac.factors) {
    int rank = hessian_rank_mod_prime(F, x, pr);
    out *= pow_big(pow_big(BigInt(f.q()), unsigned(pr.deg())),
                   unsigned(n - rank));
  }
  return out;
}

// S(c, d) = sum over x mod c with F(x) = 0 mod c of N_d(x)^{1/2}.
// This is the single non-exact value in the toolkit (float square roots).
inline double s_cd(const CubicForm& F, const Poly& c, const Poly& d,
                   Budget& budget) {
  const Field& f = F.field();
  const int n = F.n();
  if (c.is_zero() || !d.divides(c)) throw domain_error("s_cd: need d | c");
  auto fac = poly_factor(d);
  for (const auto& [pr, e] : fac.factors)
    if (e > 1) throw domain_error("s_cd: d must be squarefree");
  if (c.deg() == 0) return 1.0;
  std::uint64_t total = 1;
  for (int i = 0; i < n * c.deg(); ++i) {
    if (total > (1ull << 40)) throw capacity_error("s_cd: space");
    total *= f.q();
  }
  budget.precheck(total, "s_cd");
  budget.charge(total);
  double acc = 0;
  std::vector<FqElem> digits(std::size_t(n * c.deg()), 0);
  for (std::uint64_t idx = 0;; ++idx) {
    std::vector<Poly> x;
    for (int i = 0; i < n; ++i) {
      std::vector<FqElem> cc(std::size_t(c.deg()), 0);
      for (int j = 0; j < c.deg(); ++j)
        cc[std::size_t(j)] = digits[std::size_t(i * c.deg() + j)];
      x.emplace_back(f, cc);
    }
    if ((F.eval(std::span<const Poly>(x)) % c).is_zero()) {
      BigInt nd = hessian_kernel_count(F, std::span<const Poly>(x), d, budget);
      acc += std::sqrt(double(nd));
    }
    std::size_t s = 0;
    for (; s < digits.size(); ++s) {
      if (++digits[s] < f.q()) break;
      digits[s] = 0;
    }
    if (s == digits.size()) break;
  }
  return acc;
}

// --- multiplicative evaluation -------------------------------------------

struct MultiplicativeFactor {
  Poly prime_power;
  Poly M;
  std::vector<FqElem> residue;  // the a-vector passed to the factor sum
  CycInt value;
};

struct MultiplicativeResult {
  CycInt value;
  std::vector<MultiplicativeFactor> factors;
  bool has_phase = false;
  std::vector<FqElem> phase_residue;  // a'' of the t-nmid-r case
  CycInt phase;
};

// Splits S_{r,M,a}(c) along r = u v with t nmid u:
//   M = 1:            S_{u,1,0}(c) S_{v,1,0}(c)
//   M = t, t | r:     S_{u,1,0}(c) S_{t^A,t,a'}(c),  a' = (u mod t)^{-1} a
//   M = t, t nmid r:  S_{u,1,0}(c) S_{v,1,0}(c) psi(-c.a''/t), a'' = (r mod t)^{-1} a
// The residues a', a'' come out of splitting y over the coprime factors
// (y_v = u z turns the congruence u z = a into z = (u mod t)^{-1} a, and the
// partial fraction of c.y/rt leaves the phase c.a (r mod t)^{-1}/t).  Each
// prime-power factor is evaluated by direct summation.
inline MultiplicativeResult s_multiplicative(const CharContext& ctx,
                                             const ExpSumSpec& spec,
                                             const CubicForm& F,
                                             Budget& budget,
                                             unsigned workers = 1) {
  validate_spec(spec, F);
  const Field& f = *ctx.field;
  const Poly t = Poly::t(f);
  const std::uint32_t p = ctx.p();
  auto fac = poly_factor(spec.r);

  MultiplicativeResult out{CycInt::one(p), {}, false, {}, CycInt::one(p)};
  const std::vector<FqElem> zero_res(std::size_t(F.n()), 0);

  int t_exp = 0;
  for (const auto& [pr, e] : fac.factors)
    if (pr == t) t_exp = e;

  const bool M_is_t = spec.M.deg() == 1;

  for (const auto& [pr, e] : fac.factors) {
    if (pr == t && M_is_t) continue;  // the t-part carries the congruence
    ExpSumSpec sub{pr.pow(unsigned(e)), Poly::one(f), zero_res, spec.c};
    MultiplicativeFactor mf{sub.r, sub.M, sub.a,
                            s_naive(ctx, sub, F, budget, workers)};
    out.value = out.value * mf.value;
    out.factors.push_back(std::move(mf));
  }

  if (M_is_t) {
    if (t_exp >= 1) {
      // a' = (u mod t)^{-1} a with u = r / t^A
      Poly u = spec.r / t.pow(unsigned(t_exp));
      FqElem u0 = u.constant_coeff();
      FqElem u0inv = f.inv(u0);
      std::vector<FqElem> aprime;
      for (FqElem ai : spec.a) aprime.push_back(f.mul(u0inv, ai));
      ExpSumSpec sub{t.pow(unsigned(t_exp)), t, aprime, spec.c};
      MultiplicativeFactor mf{sub.r, sub.M, sub.a,
                              s_naive(ctx, sub, F, budget, workers)};
      out.value = out.value * mf.value;
      out.factors.push_back(std::move(mf));
    } else {
      // phase psi(-c.a''/t), a'' = (r mod t)^{-1} a
      FqElem r0inv = f.inv(spec.r.constant_coeff());
      out.has_phase = true;
      for (FqElem ai : spec.a) out.phase_residue.push_back(f.mul(r0inv, ai));
      FqElem dot = 0;
      for (int i = 0; i < F.n(); ++i)
        dot = f.add(dot, f.mul(spec.c[std::size_t(i)].constant_coeff(),
                               out.phase_residue[std::size_t(i)]));
      out.phase = ctx.psi_of_elem(f.neg(dot));
      out.value = out.value * out.phase;
    }
  }
  return out;
}

// --- report-mode bound observations (logged, never asserted) ---------------

struct CSumBoundReport {
  double observed_sum;  // sum over |c| < q^C of |S_{r3,M,a}(c)|
  double bound_shape;   // |M|^n |r3|^{n/2+1} (|r3|^{n/3} + q^{Cn}), eps = 0
  double ratio;         // the implied c_{n,eps}
};

// Truncated c-sum against the displayed shape; the constant c_{n,eps} is
// unspecified, so only the observed ratio is reported.  r3 is expected to be
// the cube-full part of a modulus.
inline CSumBoundReport c_sum_bound_report(const CharContext& ctx,
                                          const CubicForm& F, const Poly& r3,
                                          const Poly& M,
                                          const std::vector<FqElem>& a, int C,
                                          Budget& budget) {
  const Field& f = *ctx.field;
  const int n = F.n();
  CSumBoundReport rep{0, 0, 0};
  std::uint64_t ccount = 1;
  for (int i = 0; i < n * C; ++i) {
    if (ccount > (1ull << 24))
      throw capacity_error("c_sum_bound_report: c space");
    ccount *= f.q();
  }
  for (std::uint64_t idx = 0; idx < ccount; ++idx) {
    std::uint64_t v = idx;
    std::vector<Poly> c;
    for (int i = 0; i < n; ++i) {
      std::vector<FqElem> cc(std::size_t(std::max(C, 1)), 0);
      for (int j = 0; j < C; ++j) {
        cc[std::size_t(j)] = FqElem(v % f.q());
        v /= f.q();
      }
      c.emplace_back(f, cc);
    }
    ExpSumSpec spec{r3, M, a, c};
    rep.observed_sum += std::abs(s_naive(ctx, spec, F, budget).embed());
  }
  double r3abs = std::pow(double(f.q()), r3.deg());
  double mabs = std::pow(double(f.q()), std::max(M.deg(), 0));
  rep.bound_shape = std::pow(mabs, n) * std::pow(r3abs, n / 2.0 + 1.0) *
                    (std::pow(r3abs, n / 3.0) +
                     std::pow(double(f.q()), double(C) * n));
  rep.ratio = rep.observed_sum / rep.bound_shape;
  return rep;
}

struct PrimeSumBoundReport {
  double observed_abs;       // |S_prime(c)| via the complex embedding
  double bound_shape;        // |prime|^{(n+1)/2} |(prime, F*(c))|^{1/2}
  double ratio;              // observed / shape = the implied constant A(n)
  bool dual_zero;            // whether F*(c) = 0 decided the gcd factor
};

// |S_prime(c)| <= A(n) |prime|^{(n+1)/2} |(prime, F*(c))|^{1/2}.  A(n) is not
// specified, so the observed ratio is reported.  Restricted to degree-1
// primes, where the dual condition reduces to the residue field F_q.
template <class DualTest>
PrimeSumBoundReport prime_sum_bound_report(const CharContext& ctx,
                                           const CubicForm& F,
                                           const Poly& prime,
                                           const std::vector<Poly>& c,
                                           Budget& budget, DualTest&& dual) {
  if (prime.deg() != 1)
    throw domain_error("prime_sum_bound_report: degree-1 primes only");
  const Field& f = *ctx.field;
  ExpSumSpec spec{prime, Poly::one(f),
                  std::vector<FqElem>(std::size_t(F.n()), 0), c};
  CycInt s = s_naive(ctx, spec, F, budget);
  PrimeSumBoundReport rep;
  rep.observed_abs = std::abs(s.embed());
  rep.dual_zero = dual(c);
  double pa = double(f.q());
  rep.bound_shape = std::pow(pa, (F.n() + 1) / 2.0) *
                    (rep.dual_zero ? std::sqrt(pa) : 1.0);
  rep.ratio = rep.bound_shape > 0 ? rep.observed_abs / rep.bound_shape : 0;
  return rep;
}

}  // namespace ffcm
