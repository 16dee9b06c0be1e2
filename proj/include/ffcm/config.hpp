#pragma once

#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include "ffcm/serialize.hpp"

namespace ffcm {

// Run configuration.  Everything a run depends on lives here (and round-trips
// byte-identically through the canonical dump); the environment may override
// only the worker count (FFCM_WORKERS) and the budget (FFCM_BUDGET).
struct RunConfig {
  Json raw;

  std::uint32_t p = 5;
  std::uint32_t k = 1;
  std::vector<std::uint32_t> modulus;
  bool theorem_mode = true;
  bool identity_mode = false;

  int n = 2;
  std::optional<std::vector<FqElem>> diagonal;
  std::vector<CubicForm::Mono> monomials;

  bool auto_points = true;
  std::vector<FqElem> point_a, point_b;

  std::vector<int> d_list{1};
  std::uint64_t budget = 1ull << 31;
  unsigned workers = 1;
  std::uint64_t seed = 1;

  int deg_max = 1;
  int e_max = 1;
  int m_max = 2;
  int depth = 0;  // 0 = derive from depth_bound

  std::vector<Frac> q_grid{Frac(1), Frac(2)};  // dissection Q values
  std::vector<Json> poisson_r;                 // poly coefficient arrays

  Json expsum_spec;  // {r, M, a, c} for the expsum subcommand
  Json sweep;        // {n_list, d_list, q_list} for predict sweeps

  std::string canonical() const { return raw.dump(); }

  std::uint64_t hash() const {
    // FNV-1a over the canonical dump
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }
};

namespace detail {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace detail

inline RunConfig parse_config(const Json& j) {
  RunConfig cfg;
  cfg.raw = j;
  try {
    if (!j.is_object()) throw config_error("config: expected an object");
    const Json& field = j.at("field");
    cfg.p = field.at("p").get<std::uint32_t>();
    cfg.k = detail::get_or<std::uint32_t>(field, "k", 1);
    if (field.contains("modulus"))
      cfg.modulus = field.at("modulus").get<std::vector<std::uint32_t>>();
    if (cfg.k > 1 && cfg.modulus.empty())
      throw config_error("config: extension fields require a pinned modulus");

    if (j.contains("mode")) {
      cfg.theorem_mode = detail::get_or(j.at("mode"), "theorem_mode",
                                        cfg.p > 3);
      cfg.identity_mode =
          detail::get_or(j.at("mode"), "identity_mode", !cfg.theorem_mode);
    } else {
      cfg.theorem_mode = cfg.p > 3;
      cfg.identity_mode = !cfg.theorem_mode;
    }

    const Json& form = j.at("form");
    cfg.n = form.at("n").get<int>();
    if (cfg.n < 1) throw config_error("config: n >= 1");
    if (form.contains("diagonal")) {
      cfg.diagonal = std::vector<FqElem>();
      for (const auto& c : form.at("diagonal"))
        cfg.diagonal->push_back(c.get<FqElem>());
      if (int(cfg.diagonal->size()) != cfg.n)
        throw config_error("config: diagonal length != n");
    } else if (form.contains("monomials")) {
      for (const auto& m : form.at("monomials")) {
        auto vars = m.at("vars").get<std::vector<int>>();
        if (vars.size() != 3)
          throw config_error("config: monomial needs 3 variable indexes");
        cfg.monomials.push_back(
            {vars[0], vars[1], vars[2], m.at("coeff").get<FqElem>()});
      }
      if (cfg.monomials.empty())
        throw config_error("config: empty monomial list");
    } else {
      throw config_error("config: form needs 'diagonal' or 'monomials'");
    }

    if (j.contains("points")) {
      const Json& pts = j.at("points");
      cfg.auto_points = detail::get_or(pts, "auto", false);
      if (!cfg.auto_points) {
        cfg.point_a = pts.at("a").get<std::vector<FqElem>>();
        cfg.point_b = pts.at("b").get<std::vector<FqElem>>();
      }
    }

    if (j.contains("d_list"))
      cfg.d_list = j.at("d_list").get<std::vector<int>>();
    else if (j.contains("d"))
      cfg.d_list = {j.at("d").get<int>()};

    cfg.budget = detail::get_or<std::uint64_t>(j, "budget", cfg.budget);
    cfg.workers = detail::get_or<unsigned>(j, "workers", 1);
    cfg.seed = detail::get_or<std::uint64_t>(j, "seed", 1);

    if (j.contains("truncation")) {
      const Json& tr = j.at("truncation");
      cfg.deg_max = detail::get_or(tr, "deg_max", cfg.deg_max);
      cfg.e_max = detail::get_or(tr, "e_max", cfg.e_max);
      cfg.m_max = detail::get_or(tr, "m_max", cfg.m_max);
      cfg.depth = detail::get_or(tr, "depth", cfg.depth);
    }
    if (j.contains("verify")) {
      const Json& v = j.at("verify");
      if (v.contains("Q_list")) {
        cfg.q_grid.clear();
        for (const auto& x : v.at("Q_list")) {
          if (x.is_number_integer())
            cfg.q_grid.push_back(Frac(x.get<long long>()));
          else if (x.is_array() && x.size() == 2)
            cfg.q_grid.push_back(
                Frac(x[0].get<long long>(), x[1].get<long long>()));
          else
            throw config_error("config: Q entries are ints or [num, den]");
        }
      }
      if (v.contains("poisson_r"))
        for (const auto& x : v.at("poisson_r")) cfg.poisson_r.push_back(x);
    }
    if (j.contains("expsum")) cfg.expsum_spec = j.at("expsum");
    if (j.contains("sweep")) cfg.sweep = j.at("sweep");
  } catch (const Json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  // environment overrides: budget only (workers resolve at call sites)
  if (const char* env = std::getenv("FFCM_BUDGET")) {
    long long b = std::atoll(env);
    if (b > 0) cfg.budget = std::uint64_t(b);
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw config_error(std::string("config: parse failure: ") + e.what());
  }
  return parse_config(j);
}

// materialized per-run objects
struct RunContext {
  std::shared_ptr<Field> field;
  std::shared_ptr<CubicForm> form;
  PointPair pair;
  Budget budget;

  explicit RunContext(const RunConfig& cfg) : budget(cfg.budget) {
    try {
      field = cfg.modulus.empty()
                  ? std::make_shared<Field>(cfg.p, cfg.theorem_mode)
                  : std::make_shared<Field>(cfg.p, cfg.modulus,
                                            cfg.theorem_mode);
    } catch (const domain_error& e) {
      throw config_error(std::string("config: ") + e.what());
    }
    if (cfg.diagonal)
      form = std::make_shared<CubicForm>(
          CubicForm::diagonal(*field, *cfg.diagonal));
    else {
      try {
        form = std::make_shared<CubicForm>(*field, cfg.n, cfg.monomials);
      } catch (const domain_error& e) {
        throw config_error(std::string("config: ") + e.what());
      }
    }
    if (cfg.auto_points) {
      auto found = find_point_pair(*form);
      if (!found)
        throw config_error("config: no marked point pair exists at this q");
      pair = *found;
    } else {
      pair = PointPair{cfg.point_a, cfg.point_b};
      try {
        validate_point_pair(*form, pair, !cfg.identity_mode);
      } catch (const domain_error& e) {
        throw config_error(std::string("config: ") + e.what());
      }
    }
  }
};

}  // namespace ffcm
