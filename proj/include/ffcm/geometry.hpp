#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ffcm/cubic_form.hpp"

namespace ffcm {

struct PointPair {
  std::vector<FqElem> a;
  std::vector<FqElem> b;
};

// Validates F(a) = F(b) = 0 with a, b nonzero; the Hessian condition
// H(b) != 0 applies under theorem_mode and is skipped in identity mode.
inline void validate_point_pair(const CubicForm& F, const PointPair& pair,
                                bool require_hessian) {
  auto nonzero = [](const std::vector<FqElem>& v) {
    for (FqElem c : v)
      if (c) return true;
    return false;
  };
  if (int(pair.a.size()) != F.n() || int(pair.b.size()) != F.n())
    throw domain_error("point pair: dimension mismatch");
  if (!nonzero(pair.a) || !nonzero(pair.b))
    throw domain_error("point pair: marked points must be nonzero");
  if (F.eval(std::span<const FqElem>(pair.a)) != 0 ||
      F.eval(std::span<const FqElem>(pair.b)) != 0)
    throw domain_error("point pair: F(a) = F(b) = 0 required");
  if (require_hessian &&
      eval_hessian_det(F, std::span<const FqElem>(pair.b)) == 0)
    throw domain_error("point pair: H(b) != 0 required");
}

namespace detail {

// enumerate representatives of P^{n-1}(E): first nonzero coordinate 1
template <class Visit>
void for_each_projective_point(const Field& E, int n, Visit visit) {
  std::vector<FqElem> x(std::size_t(n), 0);
  for (int lead = n - 1; lead >= 0; --lead) {
    // coordinates before `lead` are zero, x[lead] = 1, rest free
    std::fill(x.begin(), x.end(), 0);
    x[std::size_t(lead)] = 1;
    int free = n - 1 - lead;
    std::uint64_t total = 1;
    for (int i = 0; i < free; ++i) total *= E.q();
    for (std::uint64_t idx = 0; idx < total; ++idx) {
      std::uint64_t v = idx;
      for (int i = 0; i < free; ++i) {
        x[std::size_t(lead + 1 + i)] = FqElem(v % E.q());
        v /= E.q();
      }
      if (!visit(x)) return;
    }
  }
}

// the form with coefficients pushed through an embedding
inline CubicForm embed_form(const CubicForm& F, const Field& E,
                            const Embedding& emb) {
  std::vector<CubicForm::Mono> monos;
  for (const auto& m : F.monomials()) monos.push_back({m.i, m.j, m.k, emb(m.c)});
  return CubicForm(E, F.n(), std::move(monos));
}

inline Field extension_field(const Field& base, int m) {
  if (m == 1) return base;
  std::uint32_t p = base.p();
  std::uint32_t kk = base.k() * std::uint32_t(m);
  // deterministic modulus: lexicographically least monic irreducible over F_p
  std::vector<std::uint32_t> mod(kk + 1, 0);
  mod[kk] = 1;
  std::uint64_t total = 1;
  for (std::uint32_t i = 0; i < kk; ++i) {
    total *= p;
    if (total > (1ull << 26))
      throw capacity_error("extension_field: modulus search space");
  }
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t v = idx;
    for (std::uint32_t i = 0; i < kk; ++i) {
      mod[i] = std::uint32_t(v % p);
      v /= p;
    }
    if (detail::fp_irreducible(mod, p)) return Field(p, mod, false);
  }
  throw domain_error("extension_field: no irreducible modulus found");
}

}  // namespace detail

struct SmoothnessVerdict {
  enum Kind { DIAGONAL_NONSINGULAR, NO_SINGULAR_POINT_FOUND, SINGULAR_WITNESS };
  Kind kind;
  int searched_m = 0;                // extension degrees searched
  int witness_m = 0;                 // extension degree of the witness
  std::vector<FqElem> witness;       // indexes in the witness field
  bool nonsingular() const { return kind != SINGULAR_WITNESS; }
  std::string str() const {
    switch (kind) {
      case DIAGONAL_NONSINGULAR: return "NONSINGULAR (diagonal criterion)";
      case NO_SINGULAR_POINT_FOUND:
        return "NO-SINGULAR-POINT-FOUND (m <= " + std::to_string(searched_m) +
               ")";
      default: return "SINGULAR-WITNESS (m = " + std::to_string(witness_m) + ")";
    }
  }
};

// For diagonal forms the verdict is proof-level: nonsingular iff char does
// not divide 3 and every coefficient is nonzero.  Otherwise searches
// P^{n-1}(F_{q^m}) for m <= m_max for a point with vanishing gradient
// (F(x) = 0 follows from the Euler relation when p > 3).
inline SmoothnessVerdict smoothness_check(const CubicForm& F, int m_max) {
  if (m_max < 1) throw domain_error("smoothness_check: m_max >= 1");
  const Field& base = F.field();
  if (F.is_diagonal() && base.p() != 3) {
    std::vector<FqElem> diag(std::size_t(F.n()), 0);
    for (const auto& m : F.monomials()) diag[std::size_t(m.i)] = m.c;
    bool all_nonzero = true;
    for (FqElem c : diag)
      if (!c) all_nonzero = false;
    if (all_nonzero) return {SmoothnessVerdict::DIAGONAL_NONSINGULAR, m_max, 0, {}};
    // some variable missing: the coordinate point is singular
    SmoothnessVerdict v{SmoothnessVerdict::SINGULAR_WITNESS, m_max, 1, {}};
    v.witness.assign(std::size_t(F.n()), 0);
    for (int i = 0; i < F.n(); ++i)
      if (!diag[std::size_t(i)]) {
        v.witness[std::size_t(i)] = 1;
        break;
      }
    return v;
  }
  for (int m = 1; m <= m_max; ++m) {
    Field E = detail::extension_field(base, m);
    Embedding emb = find_embedding(base, E);
    CubicForm FE = detail::embed_form(F, E, emb);
    std::uint64_t points = 1;
    for (int i = 0; i < F.n(); ++i) {
      points *= E.q();
      if (points > (1ull << 30))
        throw capacity_error("smoothness_check: search space beyond cap");
    }
    SmoothnessVerdict found{SmoothnessVerdict::NO_SINGULAR_POINT_FOUND, m_max, 0, {}};
    bool hit = false;
    detail::for_each_projective_point(E, F.n(), [&](const std::vector<FqElem>& x) {
      bool singular = FE.eval(std::span<const FqElem>(x)) == 0;
      if (singular) {
        for (int a = 0; a < F.n() && singular; ++a)
          if (FE.grad_in(FqRing{&E}, a, std::span<const FqElem>(x)) != 0)
            singular = false;
      }
      if (singular) {
        found = {SmoothnessVerdict::SINGULAR_WITNESS, m_max, m, x};
        hit = true;
        return false;
      }
      return true;
    });
    if (hit) return found;
  }
  return {SmoothnessVerdict::NO_SINGULAR_POINT_FOUND, m_max, 0, {}};
}

struct DualVerdict {
  bool zero = false;  // dual form vanishes at c (witness found)
  int searched_m = 0;
  int witness_m = 0;
  std::vector<FqElem> witness;
  std::string str() const {
    return zero ? "ZERO (witness at m = " + std::to_string(witness_m) + ")"
                : "NONZERO-up-to-" + std::to_string(searched_m);
  }
};

// Decides F*(c) = 0 as a bounded point search: ZERO iff some x in
// P^{n-1}(F_{q^m}), m <= m_max, has F(x) = 0, c.x = 0 and grad F(x)
// parallel to c.  c has polynomial entries; both linear conditions are read
// off per t-coefficient, and parallelism is rank(2 x n) <= 1 via 2x2 minors,
// avoiding division.  NONZERO-up-to-m_max is a bounded-search label, not a
// proof.
inline DualVerdict dual_zero_test(const CubicForm& F,
                                  const std::vector<Poly>& c, int m_max) {
  if (int(c.size()) != F.n()) throw domain_error("dual_zero_test: dimension");
  bool all_zero = true;
  int cdeg = 0;
  for (const auto& ci : c)
    if (!ci.is_zero()) {
      all_zero = false;
      cdeg = std::max(cdeg, ci.deg());
    }
  if (all_zero) throw domain_error("dual_zero_test: c = 0");
  const Field& base = F.field();
  for (int m = 1; m <= m_max; ++m) {
    Field E = detail::extension_field(base, m);
    Embedding emb = find_embedding(base, E);
    CubicForm FE = detail::embed_form(F, E, emb);
    std::uint64_t points = 1;
    for (int i = 0; i < F.n() - 1; ++i) {
      points *= E.q();
      if (points > (1ull << 30))
        throw capacity_error("dual_zero_test: search space beyond cap");
    }
    DualVerdict out;
    bool hit = false;
    FqRing ring{&E};
    detail::for_each_projective_point(E, F.n(), [&](const std::vector<FqElem>& x) {
      if (FE.eval(std::span<const FqElem>(x)) != 0) return true;
      // c . x = 0, per t-coefficient
      for (int d = 0; d <= cdeg; ++d) {
        FqElem acc = 0;
        for (int i = 0; i < F.n(); ++i)
          acc = E.add(acc, E.mul(emb(c[std::size_t(i)].coeff(d)),
                                 x[std::size_t(i)]));
        if (acc) return true;
      }
      // grad F(x) parallel to c: all 2x2 minors vanish, per t-coefficient
      std::vector<FqElem> g(static_cast<std::size_t>(F.n()));
      for (int a = 0; a < F.n(); ++a)
        g[std::size_t(a)] = FE.grad_in(ring, a, std::span<const FqElem>(x));
      for (int i = 0; i < F.n(); ++i)
        for (int j = i + 1; j < F.n(); ++j)
          for (int d = 0; d <= cdeg; ++d) {
            FqElem m1 = E.mul(emb(c[std::size_t(i)].coeff(d)), g[std::size_t(j)]);
            FqElem m2 = E.mul(emb(c[std::size_t(j)].coeff(d)), g[std::size_t(i)]);
            if (m1 != m2) return true;
          }
      out.zero = true;
      out.witness_m = m;
      out.witness = x;
      hit = true;
      return false;
    });
    out.searched_m = m_max;
    if (hit) return out;
  }
  return {false, m_max, 0, {}};
}

inline DualVerdict dual_zero_test(const CubicForm& F,
                                  const std::vector<FqElem>& c, int m_max) {
  std::vector<Poly> cp;
  for (FqElem ci : c) cp.push_back(Poly::constant(F.field(), ci));
  return dual_zero_test(F, cp, m_max);
}

// Deterministic first pair under the lexicographic scan (first coordinate
// most significant): b is the first F-zero off the Hessian, a the first
// F-zero distinct from b in P^{n-1}.
inline std::optional<PointPair> find_point_pair(const CubicForm& F) {
  const Field& f = F.field();
  int n = F.n();
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) {
    total *= f.q();
    if (total > (1ull << 30))
      throw capacity_error("find_point_pair: search space beyond cap");
  }
  auto decode = [&](std::uint64_t idx) {
    std::vector<FqElem> x(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
      x[std::size_t(i)] = FqElem(idx % f.q());
      idx /= f.q();
    }
    return x;
  };
  std::optional<std::vector<FqElem>> b;
  for (std::uint64_t idx = 1; idx < total && !b; ++idx) {
    auto x = decode(idx);
    if (F.eval(std::span<const FqElem>(x)) != 0) continue;
    if (eval_hessian_det(F, std::span<const FqElem>(x)) == 0) continue;
    b = x;
  }
  if (!b) return std::nullopt;
  auto proportional = [&](const std::vector<FqElem>& x,
                          const std::vector<FqElem>& y) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (f.mul(x[std::size_t(i)], y[std::size_t(j)]) !=
            f.mul(x[std::size_t(j)], y[std::size_t(i)]))
          return false;
    return true;
  };
  for (std::uint64_t idx = 1; idx < total; ++idx) {
    auto x = decode(idx);
    if (F.eval(std::span<const FqElem>(x)) != 0) continue;
    if (proportional(x, *b)) continue;  // marks are distinct points of X
    return PointPair{x, *b};
  }
  return std::nullopt;
}

// The weight window: omega(x) = 1 iff |t x - b| < 1, i.e. x = t^-1 (b + z)
// with z in T^n.
struct WeightWindow {
  const CubicForm* F;
  std::vector<FqElem> b;

  bool contains(std::span<const Laurent> x) const {
    const Field& f = F->field();
    for (int i = 0; i < F->n(); ++i) {
      Laurent v = x[std::size_t(i)].shifted(1) -
                  Laurent::monomial(f, 0, b[std::size_t(i)]);
      if (!v.known_zero() && v.top() >= 0) return false;
    }
    return true;
  }

  // window point x = t^-1(b + z) from digit rows z_i (depth D each)
  std::vector<Laurent> point(const std::vector<std::vector<FqElem>>& digits) const {
    const Field& f = F->field();
    std::vector<Laurent> x;
    for (int i = 0; i < F->n(); ++i) {
      std::map<int, FqElem> m;
      m[-1] = b[std::size_t(i)];
      const auto& row = digits[std::size_t(i)];
      for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j]) m[-2 - int(j)] = row[j];
      x.push_back(Laurent::from_coeff_map(f, m, -2 - int(row.size()) + 1));
    }
    return x;
  }

  std::vector<Laurent> random_point(std::mt19937_64& rng, int depth) const {
    std::vector<std::vector<FqElem>> digits(static_cast<std::size_t>(F->n()));
    for (auto& row : digits) {
      row.resize(std::size_t(depth));
      for (auto& d : row) d = FqElem(rng() % F->field().q());
    }
    return point(digits);
  }
};

// |det H(x)| for a window point x = t^-1(b+z): the determinant of H(b+z) is
// an s-polynomial with constant term H(b), so the absolute value is exactly
// q^-n whenever H(b) != 0.  Computed here from the Laurent matrix, exactly.
inline Rational window_hessian_abs(const CubicForm& F,
                                   std::span<const Laurent> x) {
  Laurent det = eval_hessian_det(F, x);
  if (det.known_zero()) {
    if (!det.exact())
      throw truncation_error("window_hessian_abs: depth insufficient");
    return Rational(0);
  }
  return det.abs();
}

}  // namespace ffcm
