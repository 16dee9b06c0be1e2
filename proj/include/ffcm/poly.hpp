#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ffcm/common.hpp"
#include "ffcm/field.hpp"

namespace ffcm {

// Elements of O = F_q[t].  Coefficients little-endian, no trailing zeros;
// deg(0) = kNegInfDeg and |0| = 0 exactly.
class Poly {
 public:
  Poly() : f_(nullptr) {}
  explicit Poly(const Field& f) : f_(&f) {}
  Poly(const Field& f, std::vector<FqElem> coeffs)
      : f_(&f), c_(std::move(coeffs)) {
    normalize();
  }

  static Poly zero(const Field& f) { return Poly(f); }
  static Poly one(const Field& f) { return constant(f, 1); }
  static Poly constant(const Field& f, FqElem e) {
    Poly r(f);
    if (e) r.c_ = {e};
    return r;
  }
  static Poly t(const Field& f) { return monomial(f, 1, 1); }
  static Poly monomial(const Field& f, int deg, FqElem e) {
    Poly r(f);
    if (e) {
      r.c_.assign(static_cast<std::size_t>(deg) + 1, 0);
      r.c_.back() = e;
    }
    return r;
  }

  const Field& field() const { return *f_; }
  bool is_zero() const { return c_.empty(); }
  int deg() const { return c_.empty() ? kNegInfDeg : int(c_.size()) - 1; }
  bool is_monic() const { return !c_.empty() && c_.back() == 1; }
  FqElem lc() const { return c_.empty() ? 0 : c_.back(); }
  FqElem coeff(int i) const {
    return (i < 0 || i >= int(c_.size())) ? 0 : c_[std::size_t(i)];
  }
  FqElem constant_coeff() const { return coeff(0); }
  const std::vector<FqElem>& coeffs() const { return c_; }

  Rational abs() const {
    if (is_zero()) return Rational(0);
    return qpow(f_->q(), deg());
  }

  Poly operator+(const Poly& o) const {
    Poly r(*f_);
    r.c_.resize(std::max(c_.size(), o.c_.size()), 0);
    for (std::size_t i = 0; i < r.c_.size(); ++i)
      r.c_[i] = f_->add(coeff(int(i)), o.coeff(int(i)));
    r.normalize();
    return r;
  }
  Poly operator-(const Poly& o) const { return *this + (-o); }
  Poly operator-() const {
    Poly r(*f_);
    r.c_.resize(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] = f_->neg(c_[i]);
    return r;
  }
  Poly operator*(const Poly& o) const {
    if (is_zero() || o.is_zero()) return Poly(*f_);
    Poly r(*f_);
    r.c_.assign(c_.size() + o.c_.size() - 1, 0);
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (!c_[i]) continue;
      for (std::size_t j = 0; j < o.c_.size(); ++j)
        r.c_[i + j] = f_->add(r.c_[i + j], f_->mul(c_[i], o.c_[j]));
    }
    r.normalize();
    return r;
  }
  Poly scaled(FqElem s) const {
    Poly r(*f_);
    if (!s) return r;
    r.c_.resize(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] = f_->mul(c_[i], s);
    r.normalize();
    return r;
  }
  Poly shifted(int k) const {  // * t^k, k >= 0
    if (is_zero()) return *this;
    Poly r(*f_);
    r.c_.assign(c_.size() + std::size_t(k), 0);
    std::copy(c_.begin(), c_.end(), r.c_.begin() + k);
    return r;
  }

  // quotient/remainder; o != 0
  std::pair<Poly, Poly> divrem(const Poly& o) const {
    if (o.is_zero()) throw domain_error("poly: division by zero");
    Poly rem = *this;
    Poly quo(*f_);
    if (deg() >= o.deg()) quo.c_.assign(std::size_t(deg() - o.deg()) + 1, 0);
    FqElem lcinv = f_->inv(o.lc());
    while (!rem.is_zero() && rem.deg() >= o.deg()) {
      int shift = rem.deg() - o.deg();
      FqElem fac = f_->mul(rem.lc(), lcinv);
      quo.c_[std::size_t(shift)] = fac;
      for (int j = 0; j <= o.deg(); ++j)
        rem.c_[std::size_t(shift + j)] =
            f_->sub(rem.c_[std::size_t(shift + j)], f_->mul(fac, o.c_[j]));
      rem.normalize();
    }
    quo.normalize();
    return {quo, rem};
  }
  Poly operator/(const Poly& o) const { return divrem(o).first; }
  Poly operator%(const Poly& o) const { return divrem(o).second; }
  bool divides(const Poly& f) const { return f.divrem(*this).second.is_zero(); }

  Poly make_monic() const {
    if (is_zero()) return *this;
    return scaled(f_->inv(lc()));
  }

  Poly pow(unsigned e) const {
    Poly r = one(*f_), base = *this;
    while (e) {
      if (e & 1) r = r * base;
      base = base * base;
      e >>= 1;
    }
    return r;
  }

  FqElem eval(FqElem x) const {
    FqElem acc = 0;
    for (std::size_t i = c_.size(); i-- > 0;)
      acc = f_->add(f_->mul(acc, x), c_[i]);
    return acc;
  }

  Poly derivative() const {
    Poly r(*f_);
    if (c_.size() < 2) return r;
    r.c_.resize(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i)
      r.c_[i - 1] = f_->mul(c_[i], f_->from_int(static_cast<long long>(i)));
    r.normalize();
    return r;
  }

  bool operator==(const Poly& o) const { return c_ == o.c_; }
  bool operator!=(const Poly& o) const { return !(*this == o); }

  // deterministic ordering: by degree, then coefficient indexes from the top
  bool operator<(const Poly& o) const {
    if (c_.size() != o.c_.size()) return c_.size() < o.c_.size();
    for (std::size_t i = c_.size(); i-- > 0;)
      if (c_[i] != o.c_[i]) return c_[i] < o.c_[i];
    return false;
  }

  std::string str() const {
    if (is_zero()) return "0";
    std::string s;
    for (int i = deg(); i >= 0; --i) {
      FqElem c = coeff(i);
      if (!c) continue;
      if (!s.empty()) s += "+";
      if (c != 1 || i == 0) s += std::to_string(c);
      if (i >= 1) s += (c != 1 ? "*t" : "t");
      if (i >= 2) s += "^" + std::to_string(i);
    }
    return s;
  }

 private:
  void normalize() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }

  const Field* f_;
  std::vector<FqElem> c_;
};

inline Poly gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = a % b;
    a = b;
    b = r;
  }
  return a.make_monic();
}

// g, u, v with g = gcd monic and u*a + v*b = g
inline std::tuple<Poly, Poly, Poly> ext_gcd(const Poly& a, const Poly& b) {
  const Field& f = a.field();
  Poly r0 = a, r1 = b;
  Poly s0 = Poly::one(f), s1 = Poly::zero(f);
  Poly t0 = Poly::zero(f), t1 = Poly::one(f);
  while (!r1.is_zero()) {
    auto [q, r2] = r0.divrem(r1);
    Poly s2 = s0 - q * s1;
    Poly t2 = t0 - q * t1;
    r0 = r1;
    r1 = r2;
    s0 = s1;
    s1 = s2;
    t0 = t1;
    t1 = t2;
  }
  if (r0.is_zero()) return {r0, s0, t0};
  FqElem scale = f.inv(r0.lc());
  return {r0.scaled(scale), s0.scaled(scale), t0.scaled(scale)};
}

// inverse of a modulo m; requires gcd(a, m) = 1
inline Poly inv_mod(const Poly& a, const Poly& m) {
  auto [g, u, v] = ext_gcd(a, m);
  (void)v;
  if (g.deg() != 0) throw domain_error("poly: not invertible modulo m");
  return u % m;
}

inline Poly mulmod(const Poly& a, const Poly& b, const Poly& m) {
  return (a * b) % m;
}

inline Poly powmod(const Poly& a, const BigInt& e, const Poly& m) {
  Poly r = Poly::one(a.field());
  Poly base = a % m;
  BigInt n = e;
  while (n > 0) {
    if ((n & 1) != 0) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    n >>= 1;
  }
  return r;
}

// all monic polynomials of exact degree d, in lexicographic coefficient order
inline std::vector<Poly> all_monic_of_degree(const Field& f, int d) {
  std::vector<Poly> out;
  if (d < 0) return out;
  std::vector<FqElem> c(std::size_t(d) + 1, 0);
  c.back() = 1;
  std::uint64_t total = 1;
  for (int i = 0; i < d; ++i) total *= f.q();
  out.reserve(total);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t v = idx;
    for (int i = 0; i < d; ++i) {
      c[std::size_t(i)] = FqElem(v % f.q());
      v /= f.q();
    }
    out.emplace_back(f, c);
  }
  return out;
}

}  // namespace ffcm
