#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ffcm/common.hpp"

namespace ffcm {

// Elements of F_q are handled as integer indexes in [0, q).  The index is the
// base-p encoding of the coordinate vector w.r.t. the power basis of the
// modulus, so for prime fields the index is the residue itself.
using FqElem = std::uint32_t;

namespace detail {

inline bool is_prime_u32(std::uint32_t n) {
  if (n < 2) return false;
  for (std::uint32_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Minimal F_p[x] arithmetic used only to validate the modulus at field
// construction time (the Poly class proper depends on Field).
using FpPoly = std::vector<std::uint32_t>;  // little-endian, normalized

inline void fp_normalize(FpPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline FpPoly fp_mulmod(const FpPoly& a, const FpPoly& b, const FpPoly& m,
                        std::uint32_t p) {
  FpPoly prod(a.size() + b.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i]) continue;
    for (std::size_t j = 0; j < b.size(); ++j)
      prod[i + j] = (prod[i + j] + std::uint64_t(a[i]) * b[j]) % p;
  }
  fp_normalize(prod);
  // m monic
  while (prod.size() >= m.size()) {
    std::uint32_t top = prod.back();
    std::size_t shift = prod.size() - m.size();
    for (std::size_t j = 0; j < m.size(); ++j) {
      std::uint64_t sub = std::uint64_t(top) * m[j] % p;
      prod[shift + j] = (prod[shift + j] + p - sub) % p;
    }
    fp_normalize(prod);
  }
  return prod;
}

inline FpPoly fp_powmod_xq(std::uint64_t e, const FpPoly& m, std::uint32_t p) {
  // x^(p^e) mod m via repeated p-th powering of x
  FpPoly r = {0, 1};
  fp_normalize(r);
  for (std::uint64_t step = 0; step < e; ++step) {
    FpPoly acc = {1};
    FpPoly base = r;
    std::uint32_t n = p;
    while (n) {
      if (n & 1) acc = fp_mulmod(acc, base, m, p);
      base = fp_mulmod(base, base, m, p);
      n >>= 1;
    }
    r = acc;
  }
  return r;
}

inline FpPoly fp_gcd(FpPoly a, FpPoly b, std::uint32_t p) {
  fp_normalize(a);
  fp_normalize(b);
  while (!b.empty()) {
    // a mod b
    std::uint32_t lb = b.back();
    std::uint32_t lb_inv = 1;
    for (std::uint32_t x = 1; x < p; ++x)
      if (std::uint64_t(x) * lb % p == 1) {
        lb_inv = x;
        break;
      }
    while (a.size() >= b.size() && !a.empty()) {
      std::uint64_t f = std::uint64_t(a.back()) * lb_inv % p;
      std::size_t shift = a.size() - b.size();
      for (std::size_t j = 0; j < b.size(); ++j) {
        std::uint64_t sub = f * b[j] % p;
        a[shift + j] = (a[shift + j] + p - sub) % p;
      }
      fp_normalize(a);
    }
    std::swap(a, b);
  }
  return a;
}

// Rabin test: f (monic, deg k) is irreducible over F_p iff x^(p^k) = x mod f
// and gcd(x^(p^(k/l)) - x, f) = 1 for every prime l | k.
inline bool fp_irreducible(const FpPoly& f, std::uint32_t p) {
  std::size_t k = f.size() - 1;
  if (k == 0) return false;
  FpPoly xq = fp_powmod_xq(k, f, p);
  FpPoly x = {0, 1};
  if (xq != x) return false;
  for (std::size_t l = 2; l <= k; ++l) {
    if (k % l) continue;
    bool prime_l = true;
    for (std::size_t d = 2; d * d <= l; ++d)
      if (l % d == 0) prime_l = false;
    if (!prime_l) continue;
    FpPoly g = fp_powmod_xq(k / l, f, p);
    // g - x
    if (g.size() < 2) g.resize(2, 0);
    g[1] = (g[1] + p - 1) % p;
    fp_normalize(g);
    FpPoly d = fp_gcd(g, f, p);
    if (!(d.size() == 1)) return false;
  }
  return true;
}

}  // namespace detail

// The coefficient field F_q = F_{p^k}.  Extension fields take an explicitly
// supplied irreducible modulus; configs must pin it for reproducibility.
// theorem_mode enforces the standing hypothesis char > 3; with it off
// (identity mode) p in {2,3} is allowed for the combinatorial identities.
class Field {
 public:
  explicit Field(std::uint32_t p, bool theorem_mode = true)
      : Field(p, {}, theorem_mode) {}

  Field(std::uint32_t p, std::vector<std::uint32_t> modulus,
        bool theorem_mode = true)
      : p_(p), theorem_mode_(theorem_mode) {
    if (!detail::is_prime_u32(p)) throw domain_error("field: p must be prime");
    if (theorem_mode && p <= 3)
      throw domain_error("field: theorem_mode requires p > 3");
    if (modulus.empty()) {
      k_ = 1;
      modulus_ = {0, 1};  // x, unused
    } else {
      for (auto& c : modulus) c %= p;
      detail::fp_normalize(modulus);
      if (modulus.size() < 3)
        throw domain_error("field: extension modulus must have degree >= 2");
      if (modulus.back() != 1)
        throw domain_error("field: modulus must be monic");
      if (!detail::fp_irreducible(modulus, p))
        throw domain_error("field: modulus is not irreducible over F_p");
      k_ = static_cast<std::uint32_t>(modulus.size() - 1);
      modulus_ = std::move(modulus);
    }
    q_ = 1;
    for (std::uint32_t i = 0; i < k_; ++i) {
      if (q_ > (1u << 16) / p_) throw capacity_error("field: q too large");
      q_ *= p_;
    }
    build_tables();
  }

  std::uint32_t p() const { return p_; }
  std::uint32_t k() const { return k_; }
  std::uint32_t q() const { return q_; }
  bool theorem_mode() const { return theorem_mode_; }
  const std::vector<std::uint32_t>& modulus() const { return modulus_; }

  FqElem zero() const { return 0; }
  FqElem one() const { return 1; }

  FqElem add(FqElem a, FqElem b) const {
    if (k_ == 1) {
      std::uint32_t s = a + b;
      return s >= p_ ? s - p_ : s;
    }
    if (!add_.empty()) return add_[std::size_t(a) * q_ + b];
    return raw_add(a, b);
  }
  FqElem sub(FqElem a, FqElem b) const { return add(a, neg(b)); }
  FqElem neg(FqElem a) const {
    if (k_ == 1) return a ? p_ - a : 0;
    return neg_[a];
  }
  FqElem mul(FqElem a, FqElem b) const {
    if (k_ == 1) return std::uint32_t(std::uint64_t(a) * b % p_);
    if (!mul_.empty()) return mul_[std::size_t(a) * q_ + b];
    return raw_mul(a, b);
  }
  FqElem inv(FqElem a) const {
    if (a == 0) throw domain_error("field: inversion of zero");
    return inv_[a];
  }
  FqElem pow(FqElem a, std::uint64_t e) const {
    FqElem r = 1, base = a;
    while (e) {
      if (e & 1) r = mul(r, base);
      base = mul(base, base);
      e >>= 1;
    }
    return r;
  }
  // scalar embedding of an integer through F_p
  FqElem from_int(long long v) const {
    long long m = v % static_cast<long long>(p_);
    if (m < 0) m += p_;
    return static_cast<FqElem>(m);
  }

  // Tr_{F_q/F_p}, tabulated.
  std::uint32_t trace(FqElem a) const { return trace_[a]; }

  // coordinates w.r.t. the power basis of the modulus
  std::vector<std::uint32_t> coeff_vector(FqElem a) const {
    std::vector<std::uint32_t> c(k_);
    for (std::uint32_t i = 0; i < k_; ++i) {
      c[i] = a % p_;
      a /= p_;
    }
    return c;
  }
  FqElem from_coeff_vector(const std::vector<std::uint32_t>& c) const {
    if (c.size() != k_) throw domain_error("field: coordinate length mismatch");
    FqElem a = 0;
    for (std::uint32_t i = k_; i-- > 0;) {
      if (c[i] >= p_) throw domain_error("field: coordinate out of range");
      a = a * p_ + c[i];
    }
    return a;
  }

  bool operator==(const Field& o) const {
    return p_ == o.p_ && k_ == o.k_ && modulus_ == o.modulus_;
  }

 private:
  void build_tables() {
    neg_.resize(q_);
    inv_.resize(q_);
    trace_.resize(q_);
    if (k_ > 1) {
      if (q_ <= 1024) {  // 2 x 8MB at the cap
        add_.resize(std::size_t(q_) * q_);
        mul_.resize(std::size_t(q_) * q_);
        for (FqElem a = 0; a < q_; ++a)
          for (FqElem b = 0; b < q_; ++b) {
            add_[std::size_t(a) * q_ + b] = raw_add(a, b);
            mul_[std::size_t(a) * q_ + b] = raw_mul(a, b);
          }
      }
      for (FqElem a = 0; a < q_; ++a) neg_[a] = raw_neg(a);
    } else {
      for (FqElem a = 0; a < q_; ++a) neg_[a] = a ? p_ - a : 0;
    }
    inv_[0] = 0;
    for (FqElem a = 1; a < q_; ++a) inv_[a] = pow_raw(a, q_ - 2);
    for (FqElem a = 0; a < q_; ++a) {
      // Tr(a) = sum of a^(p^i)
      FqElem acc = 0, cur = a;
      for (std::uint32_t i = 0; i < k_; ++i) {
        acc = (k_ == 1) ? (acc + cur) % p_ : raw_add(acc, cur);
        cur = pow_raw(cur, p_);
      }
      trace_[a] = acc;  // lies in the prime subfield, index < p
    }
  }

  FqElem raw_neg(FqElem a) const {
    auto c = coeff_vector_raw(a);
    for (auto& x : c) x = x ? p_ - x : 0;
    return encode(c);
  }
  FqElem raw_add(FqElem a, FqElem b) const {
    auto ca = coeff_vector_raw(a), cb = coeff_vector_raw(b);
    for (std::uint32_t i = 0; i < k_; ++i) ca[i] = (ca[i] + cb[i]) % p_;
    return encode(ca);
  }
  FqElem raw_mul(FqElem a, FqElem b) const {
    auto ca = coeff_vector_raw(a), cb = coeff_vector_raw(b);
    std::vector<std::uint32_t> prod(2 * k_ - 1, 0);
    for (std::uint32_t i = 0; i < k_; ++i)
      for (std::uint32_t j = 0; j < k_; ++j)
        prod[i + j] = (prod[i + j] + std::uint64_t(ca[i]) * cb[j]) % p_;
    for (std::uint32_t d = 2 * k_ - 2; d >= k_; --d) {
      std::uint32_t top = prod[d];
      if (top) {
        prod[d] = 0;
        for (std::uint32_t j = 0; j < k_; ++j) {
          std::uint64_t sub = std::uint64_t(top) * modulus_[j] % p_;
          prod[d - k_ + j] = (prod[d - k_ + j] + p_ - sub) % p_;
        }
      }
      if (d == k_) break;
    }
    prod.resize(k_);
    return encode(prod);
  }
  FqElem pow_raw(FqElem a, std::uint64_t e) const {
    FqElem r = 1, base = a;
    while (e) {
      if (e & 1)
        r = (k_ == 1) ? FqElem(std::uint64_t(r) * base % p_) : raw_mul(r, base);
      base = (k_ == 1) ? FqElem(std::uint64_t(base) * base % p_)
                       : raw_mul(base, base);
      e >>= 1;
    }
    return r;
  }
  std::vector<std::uint32_t> coeff_vector_raw(FqElem a) const {
    std::vector<std::uint32_t> c(k_);
    for (std::uint32_t i = 0; i < k_; ++i) {
      c[i] = a % p_;
      a /= p_;
    }
    return c;
  }
  FqElem encode(const std::vector<std::uint32_t>& c) const {
    FqElem a = 0;
    for (std::uint32_t i = k_; i-- > 0;) a = a * p_ + c[i];
    return a;
  }

  std::uint32_t p_, k_ = 1, q_ = 0;
  bool theorem_mode_;
  std::vector<std::uint32_t> modulus_;
  std::vector<FqElem> add_, mul_, neg_, inv_;
  std::vector<std::uint32_t> trace_;
};

// Embedding F_q -> F_{q^m} (both over the same prime p).  Built by locating
// the lexicographically least root of the base modulus in the big field, so
// it is deterministic.
struct Embedding {
  const Field* src = nullptr;
  const Field* dst = nullptr;
  std::vector<FqElem> image;  // image of every source element, tabulated

  FqElem operator()(FqElem a) const { return image[a]; }
};

inline Embedding find_embedding(const Field& src, const Field& dst) {
  if (src.p() != dst.p() || dst.k() % src.k() != 0)
    throw domain_error("embedding: incompatible fields");
  Embedding e;
  e.src = &src;
  e.dst = &dst;
  if (src.k() == 1) {
    e.image.resize(src.q());
    for (FqElem a = 0; a < src.q(); ++a) e.image[a] = a;  // prime subfield
    return e;
  }
  if (dst.q() > (1u << 22))
    throw capacity_error("embedding: target field too large for root scan");
  const auto& mod = src.modulus();
  FqElem root = 0;
  bool found = false;
  for (FqElem x = 0; x < dst.q() && !found; ++x) {
    FqElem acc = 0;
    for (std::size_t i = mod.size(); i-- > 0;)
      acc = dst.add(dst.mul(acc, x), dst.from_int(mod[i]));
    if (acc == 0) {
      root = x;
      found = true;
    }
  }
  if (!found) throw domain_error("embedding: base modulus has no root");
  e.image.resize(src.q());
  for (FqElem a = 0; a < src.q(); ++a) {
    auto c = src.coeff_vector(a);
    FqElem acc = 0;
    for (std::size_t i = c.size(); i-- > 0;)
      acc = dst.add(dst.mul(acc, root), dst.from_int(c[i]));
    e.image[a] = acc;
  }
  return e;
}

}  // namespace ffcm
