#pragma once

#include <string>

#include <json.hpp>

#include "ffcm/counter.hpp"

namespace ffcm {

using Json = nlohmann::json;  // std::map-backed: keys serialize sorted

inline std::string rational_str(const Rational& r) {
  std::string s = r.numerator().str();
  if (r.denominator() != 1) s += "/" + r.denominator().str();
  return s;
}

inline std::string frac_str(const Frac& r) {
  std::string s = std::to_string(r.numerator());
  if (r.denominator() != 1) s += "/" + std::to_string(r.denominator());
  return s;
}

inline double rational_approx(const Rational& r) {
  return boost::rational_cast<double>(r);
}

// Poly: little-endian coefficient list of element indexes
inline Json to_json(const Poly& p) {
  Json arr = Json::array();
  for (int i = 0; i <= p.deg(); ++i) arr.push_back(p.coeff(i));
  return arr;
}

inline Poly poly_from_json(const Field& f, const Json& j) {
  if (!j.is_array()) throw config_error("poly: expected coefficient array");
  std::vector<FqElem> c;
  for (const auto& v : j) {
    if (!v.is_number_unsigned() && !v.is_number_integer())
      throw config_error("poly: coefficients must be integers");
    long long x = v.get<long long>();
    if (x < 0 || std::uint64_t(x) >= f.q())
      throw config_error("poly: coefficient out of range");
    c.push_back(FqElem(x));
  }
  return Poly(f, c);
}

// CycInt: integer coordinate array of length p-1, plus p
inline Json to_json(const CycInt& v) {
  Json coords = Json::array();
  for (const auto& c : v.coords()) coords.push_back(c.str());
  auto e = v.embed();
  return Json{{"p", v.p()},
              {"coords", coords},
              {"complex", {{"re", e.real()}, {"im", e.imag()}}}};
}

// Laurent: map from exponent to the coefficient vector over F_p
inline Json to_json(const Field& f, const Laurent& v) {
  Json m = Json::object();
  for (int e = v.top(); !v.known_zero() && e >= v.top() - 64; --e) {
    if (e < v.precision_floor() && !v.exact()) break;
    FqElem c = v.coeff_or_zero(e);
    if (!c) continue;
    Json vec = Json::array();
    for (std::uint32_t x : f.coeff_vector(c)) vec.push_back(x);
    m[std::to_string(e)] = vec;
  }
  Json out{{"coeffs", m}};
  if (!v.exact()) out["precision_floor"] = v.precision_floor();
  return out;
}

inline Json to_json(const ScaledCyc& v, std::uint64_t q) {
  Json out = to_json(v.v);
  out["q_exponent"] = v.qexp;
  (void)q;
  return out;
}

inline Json to_json(const BoundProfile& bp) {
  Json j{{"n", bp.n},
         {"d", bp.d},
         {"q", bp.q},
         {"Q", frac_str(bp.Q)},
         {"P_exponent", bp.P_exp},
         {"mu", bp.mu},
         {"main_exponent", frac_str(bp.main_exp)},
         {"error_exponents",
          {frac_str(bp.err1), frac_str(bp.err2), frac_str(bp.err3)}},
         {"main_dominates", bp.main_dominates}};
  if (bp.d_min)
    j["d_min"] = *bp.d_min;
  else
    j["d_min"] = "undefined (n - 9 <= 0)";
  return j;
}

inline Json to_json(const DensityReport& rep) {
  Json locals = Json::array();
  for (const auto& lf : rep.local_factors) {
    Json terms = Json::array();
    for (const auto& t : lf.terms) terms.push_back(rational_str(t));
    locals.push_back(Json{{"prime", to_json(lf.prime)},
                          {"e_max", lf.e_max},
                          {"value", rational_str(lf.value)},
                          {"terms", terms}});
  }
  return Json{{"n", rep.n},
              {"q", rep.q},
              {"deg_max", rep.deg_max},
              {"e_max", rep.e_max},
              {"t_factor", rational_str(rep.t_factor)},
              {"local_factors", locals},
              {"S_truncated", rational_str(rep.S_truncated)},
              {"S_normalized", rational_str(rep.S_normalized)},
              {"S_normalized_approx", rational_approx(rep.S_normalized)},
              {"singular_integral", rational_str(rep.J)}};
}

inline Json to_json(const CircleCheckReport& rep) {
  Json contribs = Json::array();
  for (const auto& c : rep.contributions)
    contribs.push_back(Json{{"r", to_json(c.r)},
                            {"a", to_json(c.a)},
                            {"value", to_json(c.value)},
                            {"scale_exponent", c.scale_exp}});
  return Json{{"lhs", rep.lhs.str()},
              {"rhs", rational_str(rep.rhs)},
              {"Q", frac_str(rep.Q)},
              {"status", rep.equal ? "EQUAL" : "UNEQUAL"},
              {"contributions", contribs}};
}

inline Json to_json(const PoissonReport& rep, std::uint64_t q) {
  return Json{{"lhs", to_json(rep.lhs)},
              {"rhs", to_json(rep.rhs, q)},
              {"status", rep.equal ? "EQUAL" : "UNEQUAL"},
              {"c_truncation_exponent", rep.c_exp},
              {"truncation_null_ok", rep.truncation_null_ok},
              {"terms", rep.terms.size()}};
}

}  // namespace ffcm
