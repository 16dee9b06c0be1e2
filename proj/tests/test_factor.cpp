#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ffcm/cyclotomic.hpp"
#include "ffcm/laurent.hpp"

using namespace ffcm;

TEST_CASE("laurent absolute value") {
  Field f(5);
  Laurent x = Laurent::from_poly(Poly::t(f).pow(3) + Poly::one(f));
  REQUIRE(x.abs() == Rational(125));
  REQUIRE(Laurent::monomial(f, -2, 1).abs() == qpow(5, -2));
  REQUIRE(Laurent::zero(f).abs() == Rational(0));
}

TEST_CASE("laurent arithmetic and truncation tracking") {
  Field f(5);
  Laurent a = Laurent::monomial(f, 2, 3) + Laurent::monomial(f, -1, 4);
  Laurent b = Laurent::monomial(f, -1, 1);
  REQUIRE((a + b).coeff(-1) == 0);  // 4 + 1 = 0 in F_5
  REQUIRE((a * b).coeff(1) == 3);
  REQUIRE((a * b).coeff(-2) == 4);

  // abs multiplicative on nonzero values
  std::mt19937_64 rng(3);
  for (int it = 0; it < 100; ++it) {
    std::map<int, FqElem> ma, mb;
    for (int j = 0; j < 3; ++j) {
      ma[int(rng() % 7) - 4] = FqElem(rng() % 5);
      mb[int(rng() % 7) - 4] = FqElem(rng() % 5);
    }
    Laurent x = Laurent::from_coeff_map(f, ma);
    Laurent y = Laurent::from_coeff_map(f, mb);
    if (!x.known_zero() && !y.known_zero())
      REQUIRE((x * y).abs() == x.abs() * y.abs());
  }

  // reading below the precision floor flags truncation
  Laurent trunc = Laurent::monomial(f, -1, 2).truncated(-2);
  REQUIRE(trunc.coeff(-2) == 0);
  REQUIRE_THROWS_AS(trunc.coeff(-3), truncation_error);

  // multiplication propagates the floor: deep digits of one factor interact
  // with the top of the other
  Laurent deep = Laurent::monomial(f, -1, 1).truncated(-3);
  Laurent shallow = Laurent::monomial(f, 2, 1);
  Laurent prod = deep * shallow;
  REQUIRE(prod.coeff(1) == 1);
  REQUIRE_THROWS_AS(prod.coeff(-2), truncation_error);
}

TEST_CASE("laurent quotient expansion") {
  Field f(5);
  Poly t = Poly::t(f);
  // 1/(t+1) = t^-1 - t^-2 + t^-3 - ...
  Laurent inv = laurent_quotient(Poly::one(f), t + Poly::one(f), -4);
  REQUIRE(inv.coeff(-1) == 1);
  REQUIRE(inv.coeff(-2) == 4);
  REQUIRE(inv.coeff(-3) == 1);
  REQUIRE_THROWS_AS(inv.coeff(-5), truncation_error);

  // exact division terminates with full precision
  Laurent exact = laurent_quotient(t * t + t, t, -10);
  REQUIRE(exact.exact());
  REQUIRE(exact.coeff(1) == 1);
  REQUIRE(exact.coeff(-7) == 0);

  // u/v * v recovers u on the known window
  std::mt19937_64 rng(5);
  for (int it = 0; it < 50; ++it) {
    std::vector<FqElem> cu(1 + rng() % 4), cv(1 + rng() % 4);
    for (auto& c : cu) c = FqElem(rng() % 5);
    for (auto& c : cv) c = FqElem(rng() % 5);
    Poly u(f, cu), v(f, cv);
    if (v.is_zero()) continue;
    Laurent quo = laurent_quotient(u, v, -12);
    Laurent back = quo * Laurent::from_poly(v);
    for (int e = std::max(u.deg(), 0); e >= -2; --e)
      REQUIRE(back.coeff(e) == u.coeff(e));
  }
}

TEST_CASE("cyclotomic integers") {
  const std::uint32_t p = 5;
  CycInt z = CycInt::zeta_pow(p, 1);

  SECTION("zeta^p = 1 and the vanishing sum") {
    CycInt acc = CycInt::zero(p);
    for (unsigned j = 0; j < p; ++j) acc += CycInt::zeta_pow(p, j);
    REQUIRE(acc.is_zero());
    CycInt pw = CycInt::one(p);
    for (unsigned j = 0; j < p; ++j) pw = pw * z;
    REQUIRE(pw == CycInt::one(p));
  }

  SECTION("product embedding matches embedded product") {
    std::mt19937_64 rng(9);
    for (int it = 0; it < 50; ++it) {
      CycInt a(p), b(p);
      for (unsigned j = 0; j < p - 1; ++j) {
        a += CycInt::zeta_pow(p, j) * BigInt(int(rng() % 9) - 4);
        b += CycInt::zeta_pow(p, j) * BigInt(int(rng() % 9) - 4);
      }
      auto lhs = (a * b).embed();
      auto rhs = a.embed() * b.embed();
      REQUIRE(std::abs(lhs - rhs) < 1e-9);
    }
  }

  SECTION("conjugation is the galois map zeta -> zeta^-1") {
    CycInt a = CycInt::zeta_pow(p, 2) + CycInt::zeta_pow(p, 3);
    REQUIRE(a.conjugate() == a);  // symmetric pair
    CycInt b = CycInt::zeta_pow(p, 1);
    REQUIRE(b.conjugate() == CycInt::zeta_pow(p, 4));
    REQUIRE(std::abs(b.conjugate().embed() - std::conj(b.embed())) < 1e-12);
  }

  SECTION("rational detection") {
    REQUIRE(CycInt::from_int(p, 7).is_rational_int());
    REQUIRE(CycInt::from_int(p, 7).rational_value() == 7);
    REQUIRE(!CycInt::zeta_pow(p, 1).is_rational_int());
    REQUIRE_THROWS_AS(CycInt::zeta_pow(p, 1).rational_value(), domain_error);
  }

  SECTION("zeta counter matches naive assembly") {
    ZetaCounter cnt(p);
    cnt.add(0, 3);
    cnt.add(4, 2);
    cnt.add(2, -1);
    CycInt expect = CycInt::from_int(p, 3) + CycInt::zeta_pow(p, 4) * BigInt(2) -
                    CycInt::zeta_pow(p, 2);
    REQUIRE(cnt.value() == expect);
  }
}

TEST_CASE("scaled cyclotomic alignment") {
  const std::uint32_t p = 5;
  ScaledCyc a{CycInt::from_int(p, 3), 2};   // 3 q^2
  ScaledCyc b{CycInt::from_int(p, 1), -1};  // q^-1
  ScaledCyc s = a.plus(b, 5);
  REQUIRE(s.rational(5) == Rational(BigInt(3 * 125 + 1), BigInt(5)));
  REQUIRE(a.times(b).rational(5) == Rational(BigInt(3)) * qpow(5, 1));
}
