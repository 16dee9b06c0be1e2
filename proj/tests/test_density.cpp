#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ffcm/density.hpp"
#include "ffcm/serialize.hpp"

using namespace ffcm;

namespace {
// Test-only oracle for diagonal forms: the number of zeros of
// sum c_i x_i^3 over F_q^n by convolving per-coordinate cube-value counts.
BigInt diagonal_zero_count(const Field& f, const std::vector<FqElem>& coeffs) {
  std::vector<BigInt> dist(f.q(), BigInt(0));
  dist[0] = 1;
  for (FqElem ci : coeffs) {
    std::vector<BigInt> cube_counts(f.q(), BigInt(0));
    for (FqElem x = 0; x < f.q(); ++x)
      cube_counts[f.mul(ci, f.mul(x, f.mul(x, x)))] += 1;
    std::vector<BigInt> next(f.q(), BigInt(0));
    for (FqElem s = 0; s < f.q(); ++s) {
      if (dist[s] == 0) continue;
      for (FqElem v = 0; v < f.q(); ++v)
        next[f.add(s, v)] += dist[s] * cube_counts[v];
    }
    dist = std::move(next);
  }
  return dist[0];
}
}  // namespace

TEST_CASE("local factor matches direct local sums") {
  Field f(5);
  CharContext ctx(f);
  Budget budget(1ull << 33);
  CubicForm F = CubicForm::fermat(f, 2);
  Poly t = Poly::t(f);

  // e_max = 0 is the empty product
  REQUIRE(local_factor(F, t, 0, budget).value == Rational(1));

  // matches sum |prime|^{-en} S_{prime^e}(0) with brute-force counts
  auto lf = local_factor(F, t, 4, budget, CountMode::DIRECT);
  Rational expect(0);
  for (int e = 0; e <= 4; ++e) {
    BigInt s = local_sum_from_counts(F, t, e, budget, CountMode::DIRECT);
    expect += Rational(s) / Rational(pow_big(BigInt(25), unsigned(e)));
  }
  REQUIRE(lf.value == expect);

  // e = 5 termwise decay holds with constant 1; at e = 6 the closed form is
  // |prime|^{6-2n}(1 - 1/|prime|), one power above the displayed shape, so
  // e = 6, 7 are observations only (report mode)
  REQUIRE(local_term_decay(F, t, 5, budget).within);
  for (int e = 6; e <= 7; ++e) {
    auto dec = local_term_decay(F, t, e, budget);
    INFO("e=" << e << " term/bound ratio "
              << boost::rational_cast<double>(dec.term_abs / dec.bound));
    REQUIRE(dec.term_abs <= dec.bound * Rational(BigInt(5)));
  }
}

TEST_CASE("local factor is consistent across term routes at high e_max") {
  // once e >= 5 enters the closed-form regime, the value agrees with a sum
  // assembled purely from recursion-consistent counts
  Field f(5);
  Budget budget(1ull << 33);
  CubicForm F = CubicForm::fermat(f, 2);
  Poly t = Poly::t(f);
  auto lf = local_factor(F, t, 6, budget);
  Rational expect(0);
  for (int e = 0; e <= 6; ++e) {
    BigInt s = local_sum_from_counts(F, t, e, budget, CountMode::RECURSIVE);
    expect += Rational(s) / Rational(pow_big(BigInt(25), unsigned(e)));
  }
  REQUIRE(lf.value == expect);
}

TEST_CASE("truncation trend of the normalized singular series (report mode)") {
  // |q^{n-1} S - 1| as deg_max grows; observed and logged, never asserted
  Field f(7);
  CharContext ctx(f);
  Budget budget(1ull << 33);
  CubicForm F = CubicForm::fermat(f, 4);
  auto pair = find_point_pair(F);
  REQUIRE(pair.has_value());
  auto dev = [](const Rational& x) {
    Rational d = x - Rational(1);
    return d < Rational(0) ? -d : d;
  };
  auto r1 = singular_series(ctx, F, pair->a, 1, 1, budget);
  auto r2 = singular_series(ctx, F, pair->a, 2, 1, budget);
  INFO("deg_max 1: |q^3 S - 1| = " << rational_str(dev(r1.S_normalized))
       << ", deg_max 2: " << rational_str(dev(r2.S_normalized)));
  REQUIRE(r2.local_factors.size() > r1.local_factors.size());
}

TEST_CASE("singular series for the Fermat 10-fold") {
  Field f(5);
  CharContext ctx(f);
  Budget budget(1ull << 33);
  CubicForm F = CubicForm::fermat(f, 10);
  // any a with F(a) = 0, a != 0: (1, 4, 0, ..., 0)
  std::vector<FqElem> a(10, 0);
  a[0] = 1;
  a[1] = 4;
  REQUIRE(F.eval(std::span<const FqElem>(a)) == 0);

  auto rep = singular_series(ctx, F, a, 1, 1, budget);
  REQUIRE(rep.t_factor == qpow(5, -9));

  // oracle: q^{n-1} S = prod over the q-1 degree-1 primes != t of
  // (1 + q^{-n}(q S_0 - q^n)) with S_0 the convolution count
  BigInt s0 = diagonal_zero_count(f, std::vector<FqElem>(10, 1));
  Rational local = Rational(1) + qpow(5, -10) * (Rational(BigInt(5) * s0) -
                                                 Rational(pow_big(BigInt(5), 10)));
  Rational expect_norm(1);
  for (int i = 0; i < 4; ++i) expect_norm *= local;
  REQUIRE(rep.S_normalized == expect_norm);
  // cubing is a bijection on F_5, so the degree-1 factors are exactly 1
  REQUIRE(rep.S_normalized == Rational(1));
  REQUIRE(rep.S_normalized >= Rational(9, 10));
  REQUIRE(rep.S_normalized <= Rational(11, 10));

  // deg_max = 0 leaves only the t-factor
  auto rep0 = singular_series(ctx, F, a, 0, 1, budget);
  REQUIRE(rep0.S_truncated == rep0.t_factor);

  // theorem mode is required
  Field f3(3, false);
  CharContext ctx3(f3);
  CubicForm F3(f3, 2, {{0, 0, 0, 1}, {1, 1, 1, 1}});
  std::vector<FqElem> a3{1, 2};
  REQUIRE_THROWS_AS(singular_series(ctx3, F3, a3, 1, 1, budget), domain_error);
}

TEST_CASE("singular series with nontrivial local factors at q = 7") {
  // over F_7 cubing is 3-to-1 on nonzero values, so degree-1 local factors
  // are genuinely nontrivial; compare against the convolution oracle
  Field f(7);
  CharContext ctx(f);
  Budget budget(1ull << 33);
  CubicForm F = CubicForm::fermat(f, 4);
  auto pair = find_point_pair(F);
  REQUIRE(pair.has_value());

  auto rep = singular_series(ctx, F, pair->a, 1, 1, budget);
  BigInt s0 = diagonal_zero_count(f, std::vector<FqElem>(4, 1));
  Rational local = Rational(1) + qpow(7, -4) * (Rational(BigInt(7) * s0) -
                                                Rational(pow_big(BigInt(7), 4)));
  Rational expect = qpow(7, -3);
  for (int i = 0; i < 6; ++i) expect *= local;
  REQUIRE(rep.S_truncated == expect);
}

TEST_CASE("singular integral closed form and quadrature") {
  REQUIRE(singular_integral(10, 5) == qpow(5, -7));
  REQUIRE(singular_integral(4, 7) == Rational(BigInt(1), BigInt(7)));
  REQUIRE_THROWS_AS(singular_integral(3, 5), domain_error);

  // quadrature cross-check on a small analogue: n = 2 window integral at a
  // zero b = (1, 4) of x^3 + y^3 over F_5
  Field f(5);
  CharContext ctx(f);
  CubicForm F = CubicForm::fermat(f, 2);
  std::vector<FqElem> b{1, 4};
  REQUIRE(F.eval(std::span<const FqElem>(b)) == 0);
  Rational quad = singular_integral_quadrature(ctx, F, b, 1);
  REQUIRE(quad == qpow(5, 3 - 2));
  // depth stability
  REQUIRE(singular_integral_quadrature(ctx, F, b, 2) == quad);
}

TEST_CASE("main term equals leading term under the exact factors") {
  std::mt19937_64 rng(211);
  for (int it = 0; it < 50; ++it) {
    int n = 4 + int(rng() % 8);
    int d = 1 + int(rng() % 6);
    std::uint64_t q = (it % 2) ? 5 : 7;
    // exact S = q^{-n+1}, J = q^{-(n-3)}:
    // S J q^{(d+1)(n-3)} = q^{(d-1)n - (3d-1)}
    Rational main = qpow(q, -n + 1) * qpow(q, -(n - 3)) *
                    qpow(q, (long long)(d + 1) * (n - 3));
    REQUIRE(main == leading_term(n, d, q));
  }
  REQUIRE(leading_term(10, 2, 5) == Rational(BigInt(3125)));
  // d = 1 evaluates consistently (no curve-count meaning asserted)
  REQUIRE(leading_term(10, 1, 5) == qpow(5, -2));
}

TEST_CASE("bound profile") {
  auto bp = bound_profile(10, 2, 5);
  REQUIRE(bp.mu == 4);
  REQUIRE(bp.main_exp == Frac(5));
  REQUIRE(bp.err1 == Frac(74, 3));  // 24.67
  REQUIRE(!bp.main_dominates);
  REQUIRE(bp.d_min.has_value());
  REQUIRE(*bp.d_min == 171);
  REQUIRE(bp.Q == Frac(9, 2));

  // n = 9: d_min undefined (division by n - 9)
  REQUIRE(!bound_profile(9, 2, 5).d_min.has_value());

  // J(Theta) = 1 when q^Theta |P|^3 <= 1
  REQUIRE(bp.J_exp(-3 * 3) == Frac(0));
  REQUIRE(bp.J_exp(-3 * 3 - 5) == Frac(0));
  REQUIRE(bp.J_exp(-2) == Frac(7));
  // L is a min of two exponents
  REQUIRE(bp.L_exp(10) <= Frac(-10));
  REQUIRE(bp.L_exp(-100) == Frac(-10));
  // empty c-range detection below the displayed lower bound
  REQUIRE(!bp.c_range_nonempty(0, -3 * 3 - 5, 1));
  REQUIRE(bp.c_range_nonempty(3, -9, 0));

  // at d = d_min = 171 the third error exponent ties the main exponent
  // (19(n-1)/(n-9) is an equality there); strict dominance starts at 172
  auto at_min = bound_profile(10, 171, 5);
  REQUIRE(at_min.main_exp == at_min.err3);
  REQUIRE(!at_min.main_dominates);
  REQUIRE(bound_profile(10, 172, 5).main_dominates);
  REQUIRE(!bound_profile(10, 100, 5).main_dominates);
}
