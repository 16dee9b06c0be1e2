#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "ffcm/common.hpp"

namespace ffcm {

// Exact element of Z[zeta_p], coordinates w.r.t. the basis
// {1, zeta, ..., zeta^(p-2)}; reduction uses 1 + zeta + ... + zeta^(p-1) = 0.
// Equality is tested on coordinates, never on the complex embedding.
class CycInt {
 public:
  CycInt() : p_(2), c_(1, 0) {}
  explicit CycInt(std::uint32_t p) : p_(p), c_(p - 1, 0) {}

  static CycInt zero(std::uint32_t p) { return CycInt(p); }
  static CycInt from_int(std::uint32_t p, BigInt v) {
    CycInt r(p);
    r.c_[0] = std::move(v);
    return r;
  }
  static CycInt one(std::uint32_t p) { return from_int(p, 1); }
  // zeta^j for any integer j
  static CycInt zeta_pow(std::uint32_t p, long long j) {
    CycInt r(p);
    long long m = j % static_cast<long long>(p);
    if (m < 0) m += p;
    if (m < p - 1)
      r.c_[std::size_t(m)] = 1;
    else  // zeta^(p-1) = -(1 + zeta + ... + zeta^(p-2))
      for (auto& x : r.c_) x = -1;
    return r;
  }

  std::uint32_t p() const { return p_; }
  const std::vector<BigInt>& coords() const { return c_; }

  bool is_zero() const {
    for (const auto& x : c_)
      if (x != 0) return false;
    return true;
  }
  // rational integer iff all non-constant coordinates vanish
  bool is_rational_int() const {
    for (std::size_t i = 1; i < c_.size(); ++i)
      if (c_[i] != 0) return false;
    return true;
  }
  const BigInt& rational_value() const {
    if (!is_rational_int())
      throw domain_error("cycint: value is not a rational integer");
    return c_[0];
  }

  CycInt operator+(const CycInt& o) const {
    check(o);
    CycInt r(p_);
    for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] = c_[i] + o.c_[i];
    return r;
  }
  CycInt& operator+=(const CycInt& o) {
    check(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  CycInt operator-(const CycInt& o) const {
    check(o);
    CycInt r(p_);
    for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] = c_[i] - o.c_[i];
    return r;
  }
  CycInt operator-() const {
    CycInt r(p_);
    for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] = -c_[i];
    return r;
  }
  CycInt operator*(const CycInt& o) const {
    check(o);
    // convolve in exponent space [0, 2p-4], then fold zeta^e for e >= p-1
    std::vector<BigInt> conv(2 * c_.size() - 1, BigInt(0));
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (c_[i] == 0) continue;
      for (std::size_t j = 0; j < c_.size(); ++j)
        if (o.c_[j] != 0) conv[i + j] += c_[i] * o.c_[j];
    }
    CycInt r(p_);
    for (std::size_t e = 0; e < conv.size(); ++e) {
      if (conv[e] == 0) continue;
      std::size_t m = e % p_;
      if (m < c_.size())
        r.c_[m] += conv[e];
      else
        for (auto& x : r.c_) x -= conv[e];
    }
    return r;
  }
  CycInt operator*(const BigInt& s) const {
    CycInt r(p_);
    for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] = c_[i] * s;
    return r;
  }

  // Galois action zeta -> zeta^j, (j, p) = 1; j = -1 is complex conjugation.
  CycInt galois(long long j) const {
    CycInt r(p_);
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (c_[i] == 0) continue;
      long long m = (static_cast<long long>(i) * j) % static_cast<long long>(p_);
      if (m < 0) m += p_;
      if (m < static_cast<long long>(c_.size()))
        r.c_[std::size_t(m)] += c_[i];
      else
        for (auto& x : r.c_) x -= c_[i];
    }
    return r;
  }
  CycInt conjugate() const { return galois(-1); }

  bool operator==(const CycInt& o) const { return p_ == o.p_ && c_ == o.c_; }
  bool operator!=(const CycInt& o) const { return !(*this == o); }

  // display only; exactness is always asserted on coords
  std::complex<double> embed() const {
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (c_[i] == 0) continue;
      double ang = 2.0 * std::numbers::pi * double(i) / double(p_);
      acc += double(c_[i]) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return acc;
  }

 private:
  void check(const CycInt& o) const {
    if (p_ != o.p_) throw domain_error("cycint: mixed cyclotomic orders");
  }

  std::uint32_t p_;
  std::vector<BigInt> c_;
};

// Hot-loop accumulator: tallies summands zeta^j by exponent with int64
// counts, converted to a CycInt once at the end.  Addition of counters is
// exact and associative, so parallel reductions are partition independent.
class ZetaCounter {
 public:
  explicit ZetaCounter(std::uint32_t p) : p_(p), cnt_(p, 0) {}

  void add(std::uint32_t zeta_exp, std::int64_t w = 1) { cnt_[zeta_exp] += w; }
  void add_counter(const ZetaCounter& o) {
    for (std::uint32_t i = 0; i < p_; ++i) cnt_[i] += o.cnt_[i];
  }
  std::int64_t count(std::uint32_t zeta_exp) const { return cnt_[zeta_exp]; }

  CycInt value() const {
    CycInt r(p_);
    CycInt folded = CycInt::zeta_pow(p_, p_ - 1);
    for (std::uint32_t i = 0; i + 1 < p_; ++i)
      r += CycInt::zeta_pow(p_, i) * BigInt(cnt_[i]);
    r += folded * BigInt(cnt_[p_ - 1]);
    return r;
  }

 private:
  std::uint32_t p_;
  std::vector<std::int64_t> cnt_;
};

// v * q^e with exact alignment of exponents under addition.
struct ScaledCyc {
  CycInt v;
  long long qexp = 0;

  static ScaledCyc zero(std::uint32_t p) { return {CycInt::zero(p), 0}; }

  ScaledCyc normalized(std::uint64_t q) const {
    (void)q;
    return *this;
  }
  ScaledCyc plus(const ScaledCyc& o, std::uint64_t q) const {
    if (v.is_zero()) return o;
    if (o.v.is_zero()) return *this;
    long long e = std::min(qexp, o.qexp);
    CycInt a = v * pow_big(BigInt(q), unsigned(qexp - e));
    CycInt b = o.v * pow_big(BigInt(q), unsigned(o.qexp - e));
    return {a + b, e};
  }
  ScaledCyc times(const ScaledCyc& o) const { return {v * o.v, qexp + o.qexp}; }
  bool equals(const ScaledCyc& o, std::uint64_t q) const {
    long long e = std::min(qexp, o.qexp);
    CycInt a = v * pow_big(BigInt(q), unsigned(qexp - e));
    CycInt b = o.v * pow_big(BigInt(q), unsigned(o.qexp - e));
    return a == b;
  }
  bool is_zero() const { return v.is_zero(); }
  // exact rational value when the cyclotomic part is a rational integer
  Rational rational(std::uint64_t q) const {
    Rational base(v.rational_value());
    return base * qpow(q, qexp);
  }
  std::complex<double> embed(std::uint64_t q) const {
    return v.embed() * std::pow(double(q), double(qexp));
  }
};

}  // namespace ffcm
