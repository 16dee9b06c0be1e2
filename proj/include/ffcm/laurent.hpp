#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "ffcm/common.hpp"
#include "ffcm/poly.hpp"

namespace ffcm {

// Truncated elements of K_inf = F_q((t^-1)).  Coefficients are stored on a
// dense window [floor, top]; everything below `floor` is unknown (truncated),
// everything above `top` is exactly zero.  floor == kExactFloor marks a fully
// known value.  Arithmetic propagates the floor, and any read below it raises
// truncation_error: a silently dropped t^-1 coefficient would corrupt every
// downstream character sum.
class Laurent {
 public:
  Laurent() : f_(nullptr) {}
  explicit Laurent(const Field& f) : f_(&f), lo_(0), floor_(kExactFloor) {}

  static Laurent zero(const Field& f) { return Laurent(f); }
  static Laurent monomial(const Field& f, int exp, FqElem c) {
    Laurent r(f);
    if (c) {
      r.lo_ = exp;
      r.c_ = {c};
    }
    return r;
  }
  static Laurent from_poly(const Poly& p) {
    Laurent r(p.field());
    if (!p.is_zero()) {
      r.lo_ = 0;
      r.c_ = p.coeffs();
    }
    return r;
  }
  // polynomial in s = t^-1 with coefficient of s^j at exponent -j
  static Laurent from_s_poly(const Poly& p, int floor = kExactFloor) {
    Laurent r(p.field());
    r.floor_ = floor;
    if (!p.is_zero()) {
      r.lo_ = -p.deg();
      r.c_.assign(p.coeffs().rbegin(), p.coeffs().rend());
    }
    r.clamp();
    return r;
  }
  static Laurent from_coeff_map(const Field& f,
                                const std::map<int, FqElem>& m,
                                int floor = kExactFloor) {
    Laurent r(f);
    r.floor_ = floor;
    if (!m.empty()) {
      int lo = m.begin()->first, hi = m.rbegin()->first;
      r.lo_ = lo;
      r.c_.assign(std::size_t(hi - lo) + 1, 0);
      for (auto& [e, c] : m) r.c_[std::size_t(e - lo)] = c;
    }
    r.normalize();
    r.clamp();
    return r;
  }

  const Field& field() const { return *f_; }
  int precision_floor() const { return floor_; }
  bool exact() const { return floor_ == kExactFloor; }

  // largest exponent carrying a nonzero (known) coefficient
  int top() const {
    return c_.empty() ? kNegInfDeg : lo_ + int(c_.size()) - 1;
  }
  bool known_zero() const { return c_.empty(); }

  Rational abs() const {
    if (c_.empty()) return Rational(0);
    return qpow(f_->q(), top());
  }

  FqElem coeff(int e) const {
    if (e < floor_)
      throw truncation_error("laurent: coefficient below precision floor");
    if (c_.empty() || e < lo_ || e > top()) return 0;
    return c_[std::size_t(e - lo_)];
  }
  // coefficient with truncation treated as zero; for display only
  FqElem coeff_or_zero(int e) const {
    if (c_.empty() || e < lo_ || e > top()) return 0;
    return c_[std::size_t(e - lo_)];
  }

  Laurent operator+(const Laurent& o) const {
    Laurent r(*f_);
    r.floor_ = std::max(floor_, o.floor_);
    int lo = std::min(c_.empty() ? 0 : lo_, o.c_.empty() ? 0 : o.lo_);
    int hi = std::max(top(), o.top());
    if (hi < lo) {
      r.clamp();
      return r;
    }
    r.lo_ = lo;
    r.c_.assign(std::size_t(hi - lo) + 1, 0);
    for (int e = lo; e <= hi; ++e)
      r.c_[std::size_t(e - lo)] = f_->add(coeff_or_zero(e), o.coeff_or_zero(e));
    r.normalize();
    r.clamp();
    return r;
  }
  Laurent operator-() const {
    Laurent r = *this;
    for (auto& c : r.c_) c = f_->neg(c);
    return r;
  }
  Laurent operator-(const Laurent& o) const { return *this + (-o); }

  Laurent operator*(const Laurent& o) const {
    Laurent r(*f_);
    // a known only above alpha, b only above beta: the product coefficient at
    // e is reliable once every split i + j = e has both factors known, i.e.
    // e >= max(alpha + top(b), beta + top(a))
    int fl = kExactFloor;
    if (floor_ != kExactFloor)
      fl = std::max(fl, o.known_zero() ? kExactFloor : floor_ + o.top());
    if (o.floor_ != kExactFloor)
      fl = std::max(fl, known_zero() ? kExactFloor : o.floor_ + top());
    r.floor_ = fl;
    if (c_.empty() || o.c_.empty()) {
      r.clamp();
      return r;
    }
    r.lo_ = lo_ + o.lo_;
    r.c_.assign(c_.size() + o.c_.size() - 1, 0);
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (!c_[i]) continue;
      for (std::size_t j = 0; j < o.c_.size(); ++j)
        r.c_[i + j] = f_->add(r.c_[i + j], f_->mul(c_[i], o.c_[j]));
    }
    r.normalize();
    r.clamp();
    return r;
  }

  Laurent scaled(FqElem s) const {
    Laurent r = *this;
    if (!s) {
      r.c_.clear();
      r.lo_ = 0;
      return r;
    }
    for (auto& c : r.c_) c = f_->mul(c, s);
    return r;
  }
  Laurent shifted(int k) const {  // * t^k
    Laurent r = *this;
    r.lo_ += k;
    if (r.floor_ != kExactFloor) r.floor_ += k;
    return r;
  }
  Laurent truncated(int floor) const {
    Laurent r = *this;
    r.floor_ = std::max(r.floor_, floor);
    r.clamp();
    return r;
  }

  // fractional part: coefficients at exponents <= -1 only (value mod O)
  Laurent fractional_part() const {
    Laurent r = *this;
    while (!r.c_.empty() && r.top() >= 0) r.c_.pop_back();
    r.normalize();
    return r;
  }
  // polynomial part (exponents >= 0)
  Poly polynomial_part() const {
    std::vector<FqElem> c;
    for (int e = 0; e <= top(); ++e) c.push_back(coeff_or_zero(e));
    return Poly(*f_, c);
  }

  bool operator==(const Laurent& o) const {
    return lo_ == o.lo_ && c_ == o.c_ && floor_ == o.floor_;
  }

  std::string str() const {
    if (c_.empty()) return "0";
    std::string s;
    for (int e = top(); e >= lo_; --e) {
      FqElem c = coeff_or_zero(e);
      if (!c) continue;
      if (!s.empty()) s += "+";
      s += std::to_string(c) + "*t^" + std::to_string(e);
    }
    return s;
  }

 private:
  void normalize() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
    std::size_t lead = 0;
    while (lead < c_.size() && c_[lead] == 0) ++lead;
    if (lead) {
      c_.erase(c_.begin(), c_.begin() + long(lead));
      lo_ += int(lead);
    }
    if (c_.empty()) lo_ = 0;
  }
  void clamp() {
    // drop stored coefficients below the floor
    if (floor_ == kExactFloor || c_.empty()) return;
    if (lo_ < floor_) {
      int cut = floor_ - lo_;
      if (cut >= int(c_.size())) {
        c_.clear();
        lo_ = 0;
        return;
      }
      c_.erase(c_.begin(), c_.begin() + cut);
      lo_ = floor_;
      normalize();
    }
  }

  const Field* f_;
  int lo_ = 0;
  std::vector<FqElem> c_;
  int floor_ = kExactFloor;
};

// Laurent expansion of u/v at the infinite place, with coefficients exact
// down to `floor`.  v != 0.
inline Laurent laurent_quotient(const Poly& u, const Poly& v, int floor) {
  if (v.is_zero()) throw domain_error("laurent_quotient: division by zero");
  const Field& f = u.field();
  if (u.is_zero()) return Laurent::zero(f);
  // long division in descending powers of t
  std::map<int, FqElem> coeffs;
  FqElem lcinv = f.inv(v.lc());
  // remainder as a map exponent -> coeff, starting from u
  std::map<int, FqElem> rem;
  for (int i = 0; i <= u.deg(); ++i)
    if (u.coeff(i)) rem[i] = u.coeff(i);
  int vdeg = v.deg();
  bool exact = true;
  while (!rem.empty()) {
    int e = rem.rbegin()->first;
    int shift = e - vdeg;
    if (shift < floor) {
      exact = false;  // the tail continues below the requested depth
      break;
    }
    FqElem fac = f.mul(rem.rbegin()->second, lcinv);
    coeffs[shift] = fac;
    for (int j = 0; j <= vdeg; ++j) {
      if (!v.coeff(j)) continue;
      int idx = shift + j;
      FqElem cur = rem.count(idx) ? rem[idx] : 0;
      FqElem nxt = f.sub(cur, f.mul(fac, v.coeff(j)));
      if (nxt)
        rem[idx] = nxt;
      else
        rem.erase(idx);
    }
  }
  return Laurent::from_coeff_map(f, coeffs, exact ? kExactFloor : floor);
}

}  // namespace ffcm
