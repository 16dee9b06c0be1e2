#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ffcm/charsum.hpp"
#include "ffcm/density.hpp"
#include "ffcm/expsum.hpp"
#include "ffcm/geometry.hpp"

namespace ffcm {

// A counting problem: polynomials x_i of degree <= d with constant
// coefficients a and degree-d coefficients b, F(x) identically zero.
// Every admissible x has |x| = q^d; there are q^{n(d-1)} free coefficients.
struct CountTask {
  CubicForm F;
  PointPair pair;
  int d;
  bool identity_mode;  // p in {2,3} allowed; Hessian validation skipped

  CountTask(CubicForm form, PointPair p, int degree, bool id_mode = false)
      : F(std::move(form)), pair(std::move(p)), d(degree),
        identity_mode(id_mode) {
    if (d < 1) throw domain_error("count task: d >= 1");
    validate_point_pair(F, pair, !identity_mode);
  }

  std::uint64_t free_coefficients() const {
    return std::uint64_t(F.n()) * std::uint64_t(d - 1);
  }
};

enum class CountModeCone { CONE, COPRIME };

namespace detail {

// Incremental evaluation of F along the odometer walk over free coefficients.
// Changing one coefficient of one coordinate is the substitution
// x_i -> x_i + u with u = delta t^j, and F, the gradient components and the
// Hessian entries then shift by their own Taylor ladders:
//   F      += u A_i(x) + u^2 B_i(x) + u^3 D_i
//   A_a    += u H_{ai}(x) + u^2 g_{ai}
//   H_{ab} += u T_{abi}
// with B_i linear in x, g_{ai}, T_{abi}, D_i constants.  All the expansion
// coefficients are slot-counting integers, so no division by 2 or 3 occurs
// and the walk is exact in every characteristic.  A per-step nonzero-counter
// on the F coefficients makes the zero test O(1).
class ConeKernel {
 public:
  ConeKernel(const CubicForm& F, const PointPair& pair, int d)
      : F_(&F), f_(&F.field()), n_(F.n()), d_(d) {
    flen_ = 3 * d_ + 1;
    alen_ = 2 * d_ + 1;
    hlen_ = d_ + 1;
    build_tensors();
    x_.assign(std::size_t(n_), std::vector<FqElem>(std::size_t(d_ + 1), 0));
    for (int i = 0; i < n_; ++i) {
      x_[std::size_t(i)][0] = pair.a[std::size_t(i)];
      x_[std::size_t(i)][std::size_t(d_)] = pair.b[std::size_t(i)];
    }
  }

  int free_slots() const { return n_ * (d_ - 1); }

  // coordinate / power of the flattened free slot
  int slot_coord(int s) const { return s / std::max(d_ - 1, 1); }
  int slot_power(int s) const { return 1 + s % std::max(d_ - 1, 1); }

  void seed(std::uint64_t index) {
    digits_.assign(std::size_t(std::max(free_slots(), 0)), 0);
    std::uint64_t v = index;
    for (int s = 0; s < free_slots(); ++s) {
      digits_[std::size_t(s)] = FqElem(v % f_->q());
      v /= f_->q();
      x_[std::size_t(slot_coord(s))][std::size_t(slot_power(s))] =
          digits_[std::size_t(s)];
    }
    full_init();
  }

  // advance the odometer by one; returns false on wrap-around
  bool step() {
    for (int s = 0; s < free_slots(); ++s) {
      FqElem old = digits_[std::size_t(s)];
      FqElem next = old + 1 == f_->q() ? 0 : old + 1;
      digits_[std::size_t(s)] = next;
      apply_change(slot_coord(s), slot_power(s), f_->sub(next, old));
      if (next != 0) return true;
    }
    return false;
  }

  bool f_is_zero() const { return nnz_ == 0; }

  bool coordinates_coprime() const {
    Poly g = Poly(*f_, x_[0]);
    for (int i = 1; i < n_ && g.deg() != 0; ++i)
      g = gcd(g, Poly(*f_, x_[std::size_t(i)]));
    return g.deg() == 0;
  }

  const std::vector<FqElem>& f_coeffs() const { return fval_; }

 private:
  void build_tensors() {
    D_.assign(std::size_t(n_), 0);
    blin_.assign(std::size_t(n_) * std::size_t(n_), 0);
    gsq_.assign(std::size_t(n_) * std::size_t(n_), 0);
    third_.assign(std::size_t(n_) * std::size_t(n_) * std::size_t(n_), 0);
    for (const auto& m : F_->monomials()) {
      int v[3] = {m.i, m.j, m.k};
      // D_i and B_i: slot-choice counts for the pure and double substitution
      for (int i = 0; i < n_; ++i) {
        int occ = (v[0] == i) + (v[1] == i) + (v[2] == i);
        if (occ == 3) {
          D_[std::size_t(i)] = f_->add(D_[std::size_t(i)], m.c);
          // choose 2 of 3 slots: 3 c x_i
          blin_[std::size_t(i * n_ + i)] = f_->add(
              blin_[std::size_t(i * n_ + i)], f_->mul(f_->from_int(3), m.c));
        } else if (occ == 2) {
          int other = (v[0] != i) ? v[0] : ((v[1] != i) ? v[1] : v[2]);
          blin_[std::size_t(i * n_ + other)] =
              f_->add(blin_[std::size_t(i * n_ + other)], m.c);
        }
      }
      // g_{ai}: coefficient of x_i^2 in the gradient component A_a
      for (int a = 0; a < n_; ++a)
        for (int i = 0; i < n_; ++i) {
          // slots: one equal to a, the other two equal to i
          int count = 0;
          for (int pos = 0; pos < 3; ++pos) {
            if (v[pos] != a) continue;
            int u1 = v[(pos + 1) % 3], u2 = v[(pos + 2) % 3];
            if (u1 == i && u2 == i) ++count;
          }
          if (count)
            gsq_[std::size_t(a * n_ + i)] =
                f_->add(gsq_[std::size_t(a * n_ + i)],
                        f_->mul(f_->from_int(count), m.c));
        }
      // T_{abi}: ordered third partials = permutation counts
      int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                         {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
      for (auto& pm : perms) {
        std::size_t idx =
            std::size_t((v[pm[0]] * n_ + v[pm[1]]) * n_ + v[pm[2]]);
        third_[idx] = f_->add(third_[idx], m.c);
      }
    }
  }

  void full_init() {
    PolyRing ring{f_};
    std::vector<Poly> xp;
    for (int i = 0; i < n_; ++i) xp.emplace_back(*f_, x_[std::size_t(i)]);
    auto pad = [&](const Poly& p, int len) {
      std::vector<FqElem> out(std::size_t(len), 0);
      for (int i = 0; i <= p.deg() && i < len; ++i)
        out[std::size_t(i)] = p.coeff(i);
      return out;
    };
    fval_ = pad(F_->eval(std::span<const Poly>(xp)), flen_);
    nnz_ = 0;
    for (FqElem c : fval_)
      if (c) ++nnz_;
    A_.clear();
    for (int a = 0; a < n_; ++a)
      A_.push_back(
          pad(F_->grad_in(ring, a, std::span<const Poly>(xp)), alen_));
    H_.clear();
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        H_.push_back(
            pad(F_->hess_in(ring, a, b, std::span<const Poly>(xp)), hlen_));
  }

  void addF(int pos, FqElem val) {
    if (!val) return;
    FqElem& slot = fval_[std::size_t(pos)];
    if (slot) --nnz_;
    slot = f_->add(slot, val);
    if (slot) ++nnz_;
  }

  void apply_change(int i, int j, FqElem delta) {
    if (!delta) return;
    FqElem d2 = f_->mul(delta, delta);
    FqElem d3 = f_->mul(d2, delta);
    // B_i(x) from its linear structure, using the pre-change x
    // F += u A_i + u^2 B_i + u^3 D_i
    const auto& Ai = A_[std::size_t(i)];
    for (int l = 0; l < alen_; ++l)
      addF(j + l, f_->mul(delta, Ai[std::size_t(l)]));
    for (int v = 0; v < n_; ++v) {
      FqElem bv = blin_[std::size_t(i * n_ + v)];
      if (!bv) continue;
      FqElem scale = f_->mul(d2, bv);
      const auto& xv = x_[std::size_t(v)];
      for (int l = 0; l <= d_; ++l)
        addF(2 * j + l, f_->mul(scale, xv[std::size_t(l)]));
    }
    addF(3 * j, f_->mul(d3, D_[std::size_t(i)]));
    // A_a += u H_{ai} + u^2 g_{ai}
    for (int a = 0; a < n_; ++a) {
      auto& Aa = A_[std::size_t(a)];
      const auto& Hai = H_[std::size_t(a * n_ + i)];
      for (int l = 0; l < hlen_; ++l)
        Aa[std::size_t(j + l)] =
            f_->add(Aa[std::size_t(j + l)],
                    f_->mul(delta, Hai[std::size_t(l)]));
      FqElem g = gsq_[std::size_t(a * n_ + i)];
      if (g)
        Aa[std::size_t(2 * j)] = f_->add(Aa[std::size_t(2 * j)],
                                         f_->mul(d2, g));
    }
    // H_{ab} += u T_{abi}
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) {
        FqElem tt = third_[std::size_t((a * n_ + b) * n_ + i)];
        if (tt)
          H_[std::size_t(a * n_ + b)][std::size_t(j)] =
              f_->add(H_[std::size_t(a * n_ + b)][std::size_t(j)],
                      f_->mul(delta, tt));
      }
    // finally the coordinate itself
    x_[std::size_t(i)][std::size_t(j)] =
        f_->add(x_[std::size_t(i)][std::size_t(j)], delta);
  }

  const CubicForm* F_;
  const Field* f_;
  int n_, d_, flen_, alen_, hlen_;
  std::vector<FqElem> D_, blin_, gsq_, third_;
  std::vector<std::vector<FqElem>> x_;
  std::vector<FqElem> digits_;
  std::vector<FqElem> fval_;
  int nnz_ = 0;
  std::vector<std::vector<FqElem>> A_;
  std::vector<std::vector<FqElem>> H_;
};

}  // namespace detail

struct ConeCounts {
  BigInt cone = 0;
  BigInt coprime = 0;
};

inline ConeCounts count_brute_both(const CountTask& task, Budget& budget,
                                   unsigned workers = 1) {
  const Field& f = task.F.field();
  std::uint64_t total = 1;
  for (std::uint64_t i = 0; i < task.free_coefficients(); ++i) {
    if (total > (1ull << 62) / f.q())
      throw capacity_error("count_brute: space overflow");
    total *= f.q();
  }
  budget.precheck(total, "count_brute");
  budget.charge(total);

  auto block = [&](std::uint64_t lo, std::uint64_t hi) {
    ConeCounts c;
    if (lo >= hi) return c;
    detail::ConeKernel kernel(task.F, task.pair, task.d);
    kernel.seed(lo);
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      if (kernel.f_is_zero()) {
        c.cone += 1;
        if (kernel.coordinates_coprime()) c.coprime += 1;
      }
      if (idx + 1 < hi) kernel.step();
    }
    return c;
  };
  return parallel_blocks<ConeCounts>(
      total, resolve_workers(workers), block,
      [](ConeCounts& a, const ConeCounts& b) {
        a.cone += b.cone;
        a.coprime += b.coprime;
      },
      ConeCounts{});
}

inline BigInt count_brute(const CountTask& task, CountModeCone mode,
                          Budget& budget, unsigned workers = 1) {
  ConeCounts c = count_brute_both(task, budget, workers);
  return mode == CountModeCone::CONE ? c.cone : c.coprime;
}

// measure exponent Y' of the interval {|theta| < q^{-R}}: the set of tops is
// {T : T < -R}, so the measure is q^{floor(-R)+1}, i.e. q^{-R} for integral R
inline long long interval_measure_exp(const Frac& R) {
  long long num = R.numerator(), den = R.denominator();
  // floor(-R) + 1
  long long fl = -((num + den - 1) / den);  // floor(-num/den) for den > 0
  if (num % den == 0) return -num / den;
  return fl + 1;
}

// One (r, a) contribution of the dissection, exactly q^{Yp} sum_x psi(aF(x)/r)
// over the admissible x with |F(x)| < q^{-Yp}.
struct CircleContribution {
  Poly r;
  Poly a;
  CycInt value;
  long long scale_exp;  // contribution = value * q^{scale_exp}
};

struct CircleCheckReport {
  BigInt lhs;
  Rational rhs;
  Frac Q;
  bool equal = false;
  std::vector<CircleContribution> contributions;
};

// Exact verification of the Farey dissection: N(d) assembled from
//   sum_{r monic, |r| <= q^Q} sum*_{(a,r)=1} int_{|theta|<1/(|r| q^Q)}
//     S(a/r + theta) dtheta,
// with the theta-integral collapsed per enumerated x by the closed form
// (q^{Y'} when |F(x)| < q^{-Y'}, else 0).  Q >= 1 may be rational.
inline CircleCheckReport circle_decomposition_check(const CountTask& task,
                                                    const Frac& Q,
                                                    Budget& budget,
                                                    unsigned workers = 1) {
  if (Q < Frac(1)) throw domain_error("circle check: Q >= 1");
  const Field& f = task.F.field();
  const std::uint32_t q = f.q();
  const std::uint32_t p = f.p();
  CharContext ctx(f);
  CircleCheckReport rep;
  rep.Q = Q;
  rep.lhs = count_brute(task, CountModeCone::CONE, budget, workers);

  // enumerate the admissible x once, keeping the F(x) values
  std::uint64_t total = 1;
  for (std::uint64_t i = 0; i < task.free_coefficients(); ++i) total *= q;
  {
    // the (r, a) loop touches ~ q^ceil(2Q) numerator pairs per x
    long long twoQ = 2 * Q.numerator() / Q.denominator() +
                     (2 * Q.numerator() % Q.denominator() ? 1 : 0);
    std::uint64_t pairs = 1;
    for (long long i = 0; i < twoQ; ++i) {
      if (pairs > (1ull << 62) / q)
        throw capacity_error("circle check: Q too large");
      pairs *= q;
    }
    if (pairs > (1ull << 62) / std::max<std::uint64_t>(total, 1))
      throw capacity_error("circle check: work overflow");
    budget.precheck(pairs * total, "circle check");
    budget.charge(pairs * total);
  }
  std::vector<Poly> fvalues;
  fvalues.reserve(total);
  {
    detail::ConeKernel kernel(task.F, task.pair, task.d);
    kernel.seed(0);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
      fvalues.emplace_back(f, kernel.f_coeffs());
      if (idx + 1 < total) kernel.step();
    }
  }

  long long degQ = Q.numerator() / Q.denominator();  // floor, Q >= 1
  ScaledCyc rhs_total = ScaledCyc::zero(p);
  for (long long degr = 0; degr <= degQ; ++degr) {
    for (const Poly& r : all_monic_of_degree(f, int(degr))) {
      auto units = unit_residues(r);
      long long yp = interval_measure_exp(Frac(degr) + Q);
      // weights: res(t^j g mod r) is linear in the numerator coefficients
      int mr = r.deg();
      std::vector<ZetaCounter> per_unit(units.size(), ZetaCounter(p));
      detail::ResidueCtx rc(r);
      for (const Poly& fx : fvalues) {
        // theta-integral: q^{yp} iff deg F(x) < -yp
        if (!fx.is_zero() && fx.deg() >= -yp) continue;
        auto g = rc.reduce(fx);
        std::vector<FqElem> w(std::size_t(std::max(mr, 1)), 0);
        auto sh = g;
        for (int j = 0; j < mr; ++j) {
          w[std::size_t(j)] = sh[std::size_t(mr - 1)];
          if (j + 1 < mr) rc.shift_reduce(sh);
        }
        for (std::size_t ui = 0; ui < units.size(); ++ui) {
          FqElem res = 0;
          for (int j = 0; j < mr; ++j)
            res = f.add(res, f.mul(units[ui].coeff(j), w[std::size_t(j)]));
          per_unit[ui].add(ctx.zeta_exp(res));
        }
      }
      for (std::size_t ui = 0; ui < units.size(); ++ui) {
        CircleContribution contrib{r, units[ui], per_unit[ui].value(), yp};
        rhs_total =
            rhs_total.plus(ScaledCyc{contrib.value, yp}, q);
        rep.contributions.push_back(std::move(contrib));
      }
    }
  }
  if (!rhs_total.v.is_rational_int())
    throw domain_error("circle check: non-rational dissection total");
  rep.rhs = rhs_total.rational(q);
  rep.equal = rep.rhs == Rational(rep.lhs);
  return rep;
}

// I_{rtilde}(theta; c) = int omega(u) psi(theta P^3 F(u) + P c.u / rtilde) du
// by exact quadrature over the window u = t^-1(b + z), z in T^n at depth D.
// The linear part reads z digits through the expansion of t^d c_i / rtilde;
// the cubic part pairs theta P^3 against the s-coefficients of F(b+z).
inline ScaledCyc eval_I(const CharContext& ctx, const CubicForm& F,
                        const std::vector<FqElem>& b, const Poly& rtilde,
                        const Laurent& theta, const std::vector<Poly>& c,
                        int d, int depth, Budget& budget,
                        unsigned workers = 1) {
  const Field& f = *ctx.field;
  const std::uint32_t q = f.q();
  const int n = F.n();
  if (int(c.size()) != n || int(b.size()) != n)
    throw domain_error("eval_I: dimension mismatch");
  if (depth < 1) throw domain_error("eval_I: depth >= 1");
  const int D = depth;

  std::uint64_t total = 1;
  for (int i = 0; i < n * D; ++i) {
    if (total > (1ull << 34)) throw capacity_error("eval_I: depth space");
    total *= q;
  }
  budget.precheck(total, "eval_I");
  budget.charge(total);

  const bool has_theta = !theta.known_zero();
  // nu = theta * P^3 = theta * t^{3(d+1)}; residue pairs nu_e with phi_{e-2}
  std::vector<FqElem> nu;  // index e from 2 upward
  int nu_top = kNegInfDeg;
  if (has_theta) {
    nu_top = theta.top() + 3 * (d + 1);
    // phi_j is complete only for j <= D: deeper window digits enter phi
    // linearly from index D+1 on
    if (nu_top - 2 > D)
      throw truncation_error("eval_I: depth below the cubic requirement");
    for (int e = 2; e <= nu_top; ++e)
      nu.push_back(theta.coeff(e - 3 * (d + 1)));
  }
  // mu_i = expansion of t^d c_i / rtilde, needed at exponents -1 .. D-1
  std::vector<std::vector<FqElem>> mu(static_cast<std::size_t>(n));
  FqElem const_lin = 0;
  for (int i = 0; i < n; ++i) {
    Laurent m = laurent_quotient(Poly::monomial(f, d, 1) * c[std::size_t(i)],
                                 rtilde, -2);
    auto& row = mu[std::size_t(i)];
    row.assign(std::size_t(D + 1), 0);  // row[l] = mu_i[l-1], l = 0..D
    for (int l = 0; l <= D; ++l) row[std::size_t(l)] = m.coeff(l - 1);
    // exactness: digits below depth D pair with mu at exponents >= D
    if (m.top() >= D)
      throw truncation_error("eval_I: depth below the linear requirement");
    const_lin = f.add(const_lin, f.mul(b[std::size_t(i)], row[0]));
  }

  auto block = [&](std::uint64_t lo, std::uint64_t hi) {
    ZetaCounter acc(ctx.p());
    std::vector<std::vector<FqElem>> zdig(
        std::size_t(n), std::vector<FqElem>(std::size_t(D), 0));
    std::vector<Poly> spoly(static_cast<std::size_t>(n), Poly(f));
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      std::uint64_t v = idx;
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < D; ++l) {
          zdig[std::size_t(i)][std::size_t(l)] = FqElem(v % q);
          v /= q;
        }
      FqElem res = const_lin;
      for (int i = 0; i < n; ++i)
        for (int l = 1; l <= D; ++l)
          res = f.add(res, f.mul(zdig[std::size_t(i)][std::size_t(l - 1)],
                                 mu[std::size_t(i)][std::size_t(l)]));
      if (has_theta) {
        // phi = F(b + z) as a polynomial in s
        for (int i = 0; i < n; ++i) {
          std::vector<FqElem> cc(std::size_t(D + 1), 0);
          cc[0] = b[std::size_t(i)];
          for (int l = 1; l <= D; ++l)
            cc[std::size_t(l)] = zdig[std::size_t(i)][std::size_t(l - 1)];
          spoly[std::size_t(i)] = Poly(f, cc);
        }
        Poly phi = F.eval(std::span<const Poly>(spoly));
        for (int e = 2; e <= nu_top; ++e) {
          FqElem ne = nu[std::size_t(e - 2)];
          if (ne) res = f.add(res, f.mul(ne, phi.coeff(e - 2)));
        }
      }
      acc.add(ctx.zeta_exp(res));
    }
    return acc;
  };
  ZetaCounter sum = parallel_blocks<ZetaCounter>(
      total, resolve_workers(workers), block,
      [](ZetaCounter& a, const ZetaCounter& b) { a.add_counter(b); },
      ZetaCounter(ctx.p()));
  return ScaledCyc{sum.value(), -(long long)n * (D + 1)};
}

inline Poly r_tilde(const Poly& r) {
  const Field& f = r.field();
  Poly t = Poly::t(f);
  return gcd(r, t).deg() == 1 ? r : r * t;
}

// truncation radius: |c| <= C = q |rtilde| |P|^{-1} max{1, |theta||P|^3}
inline long long c_truncation_exp(const Poly& rtilde, const Laurent& theta,
                                  int d) {
  long long jexp = 0;
  if (!theta.known_zero())
    jexp = std::max<long long>(0, theta.top() + 3 * (d + 1));
  return 1 + rtilde.deg() - (d + 1) + jexp;
}

// quadrature depth sufficient for psi(theta P^3 F(u) + P c.u / rtilde)
inline int eval_I_depth(const Laurent& theta, int d, int cdeg_max,
                        int rtilde_deg) {
  int cubic = theta.known_zero()
                  ? 1
                  : depth_bound(3 * (d + 1), theta.top());
  int linear = d + 1 + cdeg_max - rtilde_deg;
  return std::max({1, cubic, linear});
}

struct PoissonTermRecord {
  std::vector<Poly> c;
  CycInt s_value;
  ScaledCyc i_value;
};

struct PoissonReport {
  CycInt lhs;                    // sum* over a of S(a/r + theta)
  ScaledCyc rhs;                 // |P|^n |rtilde|^{-n} sum_c S I
  bool equal = false;
  bool truncation_null_ok = false;  // the c beyond the radius sum to 0
  long long c_exp = 0;
  std::vector<PoissonTermRecord> terms;
};

// Both sides of the Poisson form of the dissection summand, exactly:
//   sum*_a S(a/r + theta) = |P|^n |rtilde|^{-n} sum_{|c| <= C} S_{r,t,a}(c)
//                           I_{rtilde}(theta; c).
// When Q is given, theta is validated against the dissection interval
// |theta| < 1/(|r| q^Q).
inline PoissonReport poisson_check(const CountTask& task, const Poly& r,
                                   const Laurent& theta, Budget& budget,
                                   int extra_c_pad = 1, unsigned workers = 1,
                                   std::optional<Frac> Q = std::nullopt) {
  const Field& f = task.F.field();
  const std::uint32_t q = f.q();
  CharContext ctx(f);
  const int n = task.F.n();
  const int d = task.d;
  if (!r.is_monic()) throw domain_error("poisson_check: r must be monic");
  if (Q) {
    long long top_cap = interval_measure_exp(Frac(r.deg()) + *Q) - 1;
    if (!theta.known_zero() && theta.top() > top_cap)
      throw domain_error("poisson_check: theta outside the dissection range");
  }

  PoissonReport rep;

  // ---- left side: direct weighted sums over the admissible x ----
  std::uint64_t total = 1;
  for (std::uint64_t i = 0; i < task.free_coefficients(); ++i) total *= q;
  auto units = unit_residues(r);
  budget.precheck(total * std::max<std::uint64_t>(units.size(), 1),
                  "poisson lhs");
  budget.charge(total * std::max<std::uint64_t>(units.size(), 1));
  detail::ResidueCtx rc(r);
  int mr = r.deg();
  ZetaCounter lhs_acc(ctx.p());
  {
    detail::ConeKernel kernel(task.F, task.pair, task.d);
    kernel.seed(0);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
      Poly fx(f, kernel.f_coeffs());
      // theta part of psi((a/r + theta) F(x))
      FqElem res_theta = 0;
      for (int j = 0; j <= fx.deg(); ++j) {
        FqElem tc = theta.known_zero() ? 0 : theta.coeff(-1 - j);
        if (tc) res_theta = f.add(res_theta, f.mul(fx.coeff(j), tc));
      }
      auto g = rc.reduce(fx);
      std::vector<FqElem> w(std::size_t(std::max(mr, 1)), 0);
      auto sh = g;
      for (int j = 0; j < mr; ++j) {
        w[std::size_t(j)] = sh[std::size_t(mr - 1)];
        if (j + 1 < mr) rc.shift_reduce(sh);
      }
      for (const Poly& a : units) {
        FqElem res = res_theta;
        for (int j = 0; j < mr; ++j)
          res = f.add(res, f.mul(a.coeff(j), w[std::size_t(j)]));
        lhs_acc.add(ctx.zeta_exp(res));
      }
      if (idx + 1 < total) kernel.step();
    }
  }
  rep.lhs = lhs_acc.value();

  // ---- right side ----
  Poly rt = r_tilde(r);
  rep.c_exp = c_truncation_exp(rt, theta, d);
  ScaledCyc rhs = ScaledCyc::zero(ctx.p());
  ScaledCyc beyond = ScaledCyc::zero(ctx.p());
  long long enum_exp = rep.c_exp + extra_c_pad;
  std::uint64_t ccount = 1;
  int cdeg = int(std::max<long long>(enum_exp, 0));
  for (int i = 0; i < n * (cdeg + 1); ++i) {
    if (ccount > (1ull << 32)) throw capacity_error("poisson rhs: c space");
    ccount *= q;
  }
  int depth = eval_I_depth(theta, d, cdeg, rt.deg());
  for (std::uint64_t idx = 0; idx < ccount; ++idx) {
    std::uint64_t v = idx;
    std::vector<Poly> c;
    int deg_max_seen = kNegInfDeg;
    for (int i = 0; i < n; ++i) {
      std::vector<FqElem> cc(std::size_t(cdeg) + 1, 0);
      for (int j = 0; j <= cdeg; ++j) {
        cc[std::size_t(j)] = FqElem(v % q);
        v /= q;
      }
      Poly ci(f, cc);
      deg_max_seen = std::max(deg_max_seen, ci.deg());
      c.push_back(ci);
    }
    bool inside = true;
    if (rep.c_exp < 0)
      inside = deg_max_seen == kNegInfDeg;  // only c = 0
    else
      inside = deg_max_seen <= rep.c_exp;
    ExpSumSpec spec{r, Poly::t(f), task.pair.a, c};
    CycInt sval = s_naive(ctx, spec, task.F, budget, workers);
    ScaledCyc ival = ScaledCyc::zero(ctx.p());
    if (!sval.is_zero())
      ival = eval_I(ctx, task.F, task.pair.b, rt, theta, c, d, depth, budget,
                    workers);
    ScaledCyc term = ScaledCyc{sval, 0}.times(ival);
    if (inside) {
      rhs = rhs.plus(term, q);
      rep.terms.push_back({c, sval, ival});
    } else {
      beyond = beyond.plus(term, q);
    }
  }
  long long prefactor = (long long)n * (d + 1) - (long long)n * rt.deg();
  rep.rhs = ScaledCyc{rhs.v, rhs.qexp + prefactor};
  rep.equal = ScaledCyc{rep.lhs, 0}.equals(rep.rhs, q);
  rep.truncation_null_ok = beyond.is_zero();
  return rep;
}

// Diagnostic classification of the error-term ranges: for given (Y, Theta)
// list the admissible frequencies and whether each falls in the generic
// (dual form nonzero) or degenerate branch.
struct ErrorWitnessEntry {
  std::vector<Poly> c;
  bool dual_zero;
  int searched_m;
};

struct ErrorWitnessReport {
  Frac J_exp;
  Frac L_exp;
  Frac C_exp;
  int B = 1;
  bool c_range_nonempty = true;
  std::vector<ErrorWitnessEntry> entries;
};

inline ErrorWitnessReport error_witness(const CountTask& task, long long Y,
                                        long long Theta, int B, int m_max,
                                        Budget& budget,
                                        std::uint64_t c_cap = 4096) {
  const Field& f = task.F.field();
  const std::uint32_t q = f.q();
  const int n = task.F.n();
  BoundProfile bp = bound_profile(n, task.d, q);
  ErrorWitnessReport rep;
  rep.B = B;
  rep.J_exp = bp.J_exp(Theta);
  rep.L_exp = bp.L_exp(Theta);
  rep.C_exp = bp.C_exp(Y, Theta, B);
  rep.c_range_nonempty = bp.c_range_nonempty(Y, Theta, B);
  if (!rep.c_range_nonempty) return rep;

  long long cd = rep.C_exp.numerator() >= 0
                     ? rep.C_exp.numerator() / rep.C_exp.denominator()
                     : -1;
  if (cd < 0) {
    rep.c_range_nonempty = false;
    return rep;
  }
  std::uint64_t ccount = 1;
  for (int i = 0; i < n * (int(cd) + 1); ++i) {
    if (ccount > (1ull << 40)) throw capacity_error("error_witness: c space");
    ccount *= q;
  }
  budget.precheck(std::min<std::uint64_t>(ccount, c_cap), "error_witness");
  std::uint64_t seen = 0;
  for (std::uint64_t idx = 0; idx < ccount && seen < c_cap; ++idx) {
    std::uint64_t v = idx;
    std::vector<Poly> c;
    bool zero = true;
    for (int i = 0; i < n; ++i) {
      std::vector<FqElem> cc(std::size_t(cd) + 1, 0);
      for (int j = 0; j <= int(cd); ++j) {
        cc[std::size_t(j)] = FqElem(v % q);
        v /= q;
      }
      Poly ci(f, cc);
      if (!ci.is_zero()) zero = false;
      c.push_back(ci);
    }
    if (zero) continue;
    auto verdict = dual_zero_test(task.F, c, m_max);
    rep.entries.push_back({c, verdict.zero, verdict.searched_m});
    ++seen;
  }
  return rep;
}

}  // namespace ffcm
