#pragma once

#include <array>
#include <span>
#include <vector>

#include "ffcm/common.hpp"
#include "ffcm/laurent.hpp"
#include "ffcm/poly.hpp"

namespace ffcm {

// Lightweight ring adaptors so form evaluation is written once.  Each exposes
// zero(), add, mul and the embedding of an F_q scalar.
struct FqRing {
  const Field* f;
  using T = FqElem;
  T zero() const { return 0; }
  T add(T a, T b) const { return f->add(a, b); }
  T mul(T a, T b) const { return f->mul(a, b); }
  T scalar(FqElem c) const { return c; }
  T scale(T a, FqElem c) const { return f->mul(a, c); }
};
struct PolyRing {
  const Field* f;
  using T = Poly;
  T zero() const { return Poly::zero(*f); }
  T add(const T& a, const T& b) const { return a + b; }
  T mul(const T& a, const T& b) const { return a * b; }
  T scalar(FqElem c) const { return Poly::constant(*f, c); }
  T scale(const T& a, FqElem c) const { return a.scaled(c); }
};
struct LaurentRing {
  const Field* f;
  using T = Laurent;
  T zero() const { return Laurent::zero(*f); }
  T add(const T& a, const T& b) const { return a + b; }
  T mul(const T& a, const T& b) const { return a * b; }
  T scalar(FqElem c) const { return Laurent::monomial(*f, 0, c); }
  T scale(const T& a, FqElem c) const { return a.scaled(c); }
};

// A cubic form F in n variables over F_q, stored as a list of monomials
// c * x_i x_j x_k with i <= j <= k (so each monomial appears once; partial
// derivatives are taken formally from the multiset representation, which
// pins the multinomial conventions once and for all).
class CubicForm {
 public:
  struct Mono {
    int i, j, k;
    FqElem c;
  };

  CubicForm(const Field& f, int n, std::vector<Mono> monos)
      : f_(&f), n_(n), monos_(std::move(monos)) {
    for (auto& m : monos_) {
      std::array<int, 3> v{m.i, m.j, m.k};
      std::sort(v.begin(), v.end());
      m.i = v[0];
      m.j = v[1];
      m.k = v[2];
      if (m.i < 0 || m.k >= n) throw domain_error("cubic form: variable index");
    }
    // merge duplicates deterministically
    std::sort(monos_.begin(), monos_.end(), [](const Mono& a, const Mono& b) {
      return std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k);
    });
    std::vector<Mono> merged;
    for (const auto& m : monos_) {
      if (!merged.empty() && merged.back().i == m.i && merged.back().j == m.j &&
          merged.back().k == m.k)
        merged.back().c = f_->add(merged.back().c, m.c);
      else
        merged.push_back(m);
    }
    monos_.clear();
    for (const auto& m : merged)
      if (m.c) monos_.push_back(m);
    build_derivatives();
  }

  static CubicForm diagonal(const Field& f, const std::vector<FqElem>& coeffs) {
    std::vector<Mono> m;
    for (int i = 0; i < int(coeffs.size()); ++i)
      if (coeffs[std::size_t(i)]) m.push_back({i, i, i, coeffs[std::size_t(i)]});
    return CubicForm(f, int(coeffs.size()), std::move(m));
  }
  static CubicForm fermat(const Field& f, int n) {
    return diagonal(f, std::vector<FqElem>(std::size_t(n), 1));
  }

  const Field& field() const { return *f_; }
  int n() const { return n_; }
  const std::vector<Mono>& monomials() const { return monos_; }
  bool is_diagonal() const {
    for (const auto& m : monos_)
      if (m.i != m.j || m.j != m.k) return false;
    return true;
  }

  template <class Ring>
  typename Ring::T eval_in(const Ring& ring,
                           std::span<const typename Ring::T> x) const {
    auto acc = ring.zero();
    for (const auto& m : monos_) {
      auto term = ring.mul(ring.mul(x[std::size_t(m.i)], x[std::size_t(m.j)]),
                           x[std::size_t(m.k)]);
      acc = ring.add(acc, ring.scale(term, m.c));
    }
    return acc;
  }

  FqElem eval(std::span<const FqElem> x) const {
    return eval_in(FqRing{f_}, x);
  }
  Poly eval(std::span<const Poly> x) const { return eval_in(PolyRing{f_}, x); }
  Laurent eval(std::span<const Laurent> x) const {
    return eval_in(LaurentRing{f_}, x);
  }

  // gradient component a: quadratic form sum over (i <= j) pairs
  template <class Ring>
  typename Ring::T grad_in(const Ring& ring, int a,
                           std::span<const typename Ring::T> x) const {
    auto acc = ring.zero();
    for (const auto& term : grad_[std::size_t(a)]) {
      auto prod = ring.mul(x[std::size_t(term.i)], x[std::size_t(term.j)]);
      acc = ring.add(acc, ring.scale(prod, term.c));
    }
    return acc;
  }
  std::vector<FqElem> gradient(std::span<const FqElem> x) const {
    std::vector<FqElem> g(static_cast<std::size_t>(n_));
    for (int a = 0; a < n_; ++a) g[std::size_t(a)] = grad_in(FqRing{f_}, a, x);
    return g;
  }
  std::vector<Poly> gradient(std::span<const Poly> x) const {
    std::vector<Poly> g;
    for (int a = 0; a < n_; ++a) g.push_back(grad_in(PolyRing{f_}, a, x));
    return g;
  }

  // Hessian entry (a, b): linear form sum_v h_v x_v
  template <class Ring>
  typename Ring::T hess_in(const Ring& ring, int a, int b,
                           std::span<const typename Ring::T> x) const {
    auto acc = ring.zero();
    for (const auto& term : hess_[std::size_t(a * n_ + b)])
      acc = ring.add(acc, ring.scale(x[std::size_t(term.i)], term.c));
    return acc;
  }
  template <class Ring>
  std::vector<typename Ring::T> hessian_matrix(
      const Ring& ring, std::span<const typename Ring::T> x) const {
    std::vector<typename Ring::T> h;
    h.reserve(std::size_t(n_) * std::size_t(n_));
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) h.push_back(hess_in(ring, a, b, x));
    return h;
  }

 private:
  struct QuadTerm {
    int i, j;
    FqElem c;
  };
  struct LinTerm {
    int i;
    FqElem c;
  };

  void build_derivatives() {
    grad_.assign(std::size_t(n_), {});
    hess_.assign(std::size_t(n_) * std::size_t(n_), {});
    for (const auto& m : monos_) {
      std::array<int, 3> vars{m.i, m.j, m.k};
      // first partials: d/dx_a (x_i x_j x_k) = sum over occurrences of a
      for (int pos = 0; pos < 3; ++pos) {
        int a = vars[std::size_t(pos)];
        int u = vars[std::size_t((pos + 1) % 3)];
        int v = vars[std::size_t((pos + 2) % 3)];
        if (u > v) std::swap(u, v);
        add_quad(grad_[std::size_t(a)], u, v, m.c);
        // second partials of the remaining quadratic c * x_u x_v
        add_lin(hess_[std::size_t(a * n_ + u)], v, m.c);
        add_lin(hess_[std::size_t(a * n_ + v)], u, m.c);
      }
    }
  }
  void add_quad(std::vector<QuadTerm>& terms, int i, int j, FqElem c) {
    for (auto& t : terms)
      if (t.i == i && t.j == j) {
        t.c = f_->add(t.c, c);
        return;
      }
    terms.push_back({i, j, c});
  }
  void add_lin(std::vector<LinTerm>& terms, int i, FqElem c) {
    for (auto& t : terms)
      if (t.i == i) {
        t.c = f_->add(t.c, c);
        return;
      }
    terms.push_back({i, c});
  }

  const Field* f_;
  int n_;
  std::vector<Mono> monos_;
  std::vector<std::vector<QuadTerm>> grad_;
  std::vector<std::vector<LinTerm>> hess_;
};

// determinant over the field by Gaussian elimination; a is n x n row-major
inline FqElem det_field(const Field& f, std::vector<FqElem> a, int n) {
  FqElem det = 1;
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int r = col; r < n; ++r)
      if (a[std::size_t(r * n + col)]) {
        piv = r;
        break;
      }
    if (piv < 0) return 0;
    if (piv != col) {
      for (int c = 0; c < n; ++c)
        std::swap(a[std::size_t(piv * n + c)], a[std::size_t(col * n + c)]);
      det = f.neg(det);
    }
    FqElem d = a[std::size_t(col * n + col)];
    det = f.mul(det, d);
    FqElem dinv = f.inv(d);
    for (int r = col + 1; r < n; ++r) {
      FqElem fac = f.mul(a[std::size_t(r * n + col)], dinv);
      if (!fac) continue;
      for (int c = col; c < n; ++c)
        a[std::size_t(r * n + c)] = f.sub(
            a[std::size_t(r * n + c)], f.mul(fac, a[std::size_t(col * n + c)]));
    }
  }
  return det;
}

// cofactor determinant for ring-valued matrices (small n)
template <class Ring>
typename Ring::T det_ring(const Ring& ring,
                          const std::vector<typename Ring::T>& a, int n) {
  if (n > 8) throw capacity_error("det_ring: dimension beyond cofactor cap");
  if (n == 1) return a[0];
  auto acc = ring.zero();
  std::vector<typename Ring::T> minor;
  minor.reserve(std::size_t(n - 1) * std::size_t(n - 1));
  for (int col = 0; col < n; ++col) {
    minor.clear();
    for (int r = 1; r < n; ++r)
      for (int c = 0; c < n; ++c)
        if (c != col) minor.push_back(a[std::size_t(r * n + c)]);
    auto term = ring.mul(a[std::size_t(col)], det_ring(ring, minor, n - 1));
    if (col % 2)
      term = ring.scale(term, ring.f->neg(1));
    acc = ring.add(acc, term);
  }
  return acc;
}

inline FqElem eval_hessian_det(const CubicForm& F, std::span<const FqElem> x) {
  FqRing ring{&F.field()};
  auto h = F.hessian_matrix(ring, x);
  return det_field(F.field(), h, F.n());
}
inline Laurent eval_hessian_det(const CubicForm& F,
                                std::span<const Laurent> x) {
  LaurentRing ring{&F.field()};
  auto h = F.hessian_matrix(ring, x);
  return det_ring(ring, h, F.n());
}

}  // namespace ffcm
