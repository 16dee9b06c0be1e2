#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "ffcm/config.hpp"

namespace ffcm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIdentityFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitBudget = 3;

namespace detail {

inline void write_file(const std::string& dir, const std::string& name,
                       const std::string& content) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/" + name, std::ios::binary);
  out << content;
}

inline Json report_envelope(const RunConfig& cfg, const std::string& mode,
                            Json task, Json value, const Budget& budget) {
  // `elapsed` counts enumeration work units, not wall time, so identical
  // configs produce byte-identical reports
  return Json{{"task", std::move(task)},
              {"mode", mode},
              {"value", std::move(value)},
              {"budget_used", budget.used()},
              {"elapsed", budget.used()},
              {"config_hash", cfg.hash()},
              {"seed", cfg.seed}};
}

inline Json task_json(const RunConfig& cfg, const RunContext& ctx, int d) {
  Json form;
  if (cfg.diagonal) {
    form = Json{{"n", cfg.n}, {"diagonal", *cfg.diagonal}};
  } else {
    Json monos = Json::array();
    for (const auto& m : ctx.form->monomials())
      monos.push_back(Json{{"vars", {m.i, m.j, m.k}}, {"coeff", m.c}});
    form = Json{{"n", cfg.n}, {"monomials", monos}};
  }
  return Json{{"q", ctx.field->q()}, {"form", form},
              {"a", ctx.pair.a},     {"b", ctx.pair.b},
              {"d", d}};
}

inline std::string csv_ratio(const Rational& num, const Rational& den) {
  if (den == Rational(0)) return "inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(9)
     << rational_approx(num / den);
  return os.str();
}

struct CheckLine {
  std::string name;
  std::string status;  // PASS / FAIL / EQUAL / UNEQUAL / SKIPPED
  std::string detail;
  bool failed() const { return status == "FAIL" || status == "UNEQUAL"; }
};

}  // namespace detail

// ---- count -----------------------------------------------------------------

inline int run_count(const RunConfig& cfg, const std::string& out_dir,
                     std::ostream& human) {
  RunContext ctx(cfg);
  Json results = Json::array();
  std::ostringstream csv;
  csv << "q,n,d,N_cone,N_coprime,leading_term,ratio\n";
  for (int d : cfg.d_list) {
    CountTask task(*ctx.form, ctx.pair, d, cfg.identity_mode);
    ConeCounts counts = count_brute_both(task, ctx.budget, cfg.workers);
    Rational lead = leading_term(cfg.n, d, ctx.field->q());
    results.push_back(Json{{"d", d},
                           {"N_cone", counts.cone.str()},
                           {"N_coprime", counts.coprime.str()},
                           {"leading_term", rational_str(lead)}});
    csv << ctx.field->q() << ',' << cfg.n << ',' << d << ',' << counts.cone
        << ',' << counts.coprime << ',' << rational_str(lead) << ','
        << detail::csv_ratio(Rational(counts.cone), lead) << "\n";
    human << "d = " << d << ": N_cone = " << counts.cone
          << ", N_coprime = " << counts.coprime
          << ", leading term = " << rational_str(lead) << "\n";
  }
  Json rep = detail::report_envelope(
      cfg, "count", detail::task_json(cfg, ctx, cfg.d_list.front()),
      std::move(results), ctx.budget);
  detail::write_file(out_dir, "count_report.json", rep.dump(2) + "\n");
  detail::write_file(out_dir, "count_sweep.csv", csv.str());
  return kExitOk;
}

// ---- predict ---------------------------------------------------------------

inline int run_predict(const RunConfig& cfg, const std::string& out_dir,
                       std::ostream& human) {
  if (!cfg.sweep.is_null()) {
    // formula-level sweep over (n, d, q)
    std::ostringstream csv;
    csv << "q,n,d,mu,main_exponent,err1,err2,err3,main_dominates,d_min,"
           "leading_term\n";
    auto nl = cfg.sweep.at("n_list").get<std::vector<int>>();
    auto dl = cfg.sweep.at("d_list").get<std::vector<int>>();
    auto ql = cfg.sweep.at("q_list").get<std::vector<std::uint64_t>>();
    for (std::uint64_t q : ql)
      for (int n : nl)
        for (int d : dl) {
          BoundProfile bp = bound_profile(n, d, q);
          csv << q << ',' << n << ',' << d << ',' << bp.mu << ','
              << frac_str(bp.main_exp) << ',' << frac_str(bp.err1) << ','
              << frac_str(bp.err2) << ',' << frac_str(bp.err3) << ','
              << (bp.main_dominates ? 1 : 0) << ','
              << (bp.d_min ? std::to_string(*bp.d_min) : "undefined") << ','
              << rational_str(leading_term(n, d, q)) << "\n";
        }
    detail::write_file(out_dir, "predict_sweep.csv", csv.str());
    human << "sweep rows written\n";
    return kExitOk;
  }

  RunConfig cfg2 = cfg;
  RunContext ctx(cfg2);
  CharContext cc(*ctx.field);
  DensityReport dens;
  try {
    dens = singular_series(cc, *ctx.form, ctx.pair.a, cfg.deg_max, cfg.e_max,
                           ctx.budget);
  } catch (const domain_error& e) {
    throw config_error(std::string("predict: ") + e.what());
  }
  Json profiles = Json::array();
  human << "q^(n-1) * S_truncated = " << rational_str(dens.S_normalized)
        << "  (deg_max " << cfg.deg_max << ", e_max " << cfg.e_max << ")\n";
  human << "singular integral = " << rational_str(dens.J) << "\n";
  for (int d : cfg.d_list) {
    BoundProfile bp = bound_profile(cfg.n, d, ctx.field->q());
    Json pj = to_json(bp);
    pj["main_term_truncated"] = rational_str(dens.main_term(d));
    pj["leading_term"] = rational_str(leading_term(cfg.n, d, ctx.field->q()));
    profiles.push_back(pj);
    human << "d = " << d << ": mu = " << bp.mu
          << ", main exponent = " << frac_str(bp.main_exp)
          << ", dominates = " << (bp.main_dominates ? "yes" : "no") << "\n";
  }
  Json value{{"density", to_json(dens)}, {"profiles", profiles}};
  Json rep = detail::report_envelope(
      cfg, "predict", detail::task_json(cfg, ctx, cfg.d_list.front()),
      std::move(value), ctx.budget);
  detail::write_file(out_dir, "predict_report.json", rep.dump(2) + "\n");
  return kExitOk;
}

// ---- singular-series -------------------------------------------------------

inline int run_singular_series(const RunConfig& cfg, const std::string& out_dir,
                               std::ostream& human) {
  RunContext ctx(cfg);
  CharContext cc(*ctx.field);
  DensityReport dens;
  try {
    dens = singular_series(cc, *ctx.form, ctx.pair.a, cfg.deg_max, cfg.e_max,
                           ctx.budget);
  } catch (const domain_error& e) {
    throw config_error(std::string("singular-series: ") + e.what());
  }
  human << "t_factor = " << rational_str(dens.t_factor) << "\n"
        << "S_truncated = " << rational_str(dens.S_truncated) << "\n"
        << "q^(n-1) S = " << rational_str(dens.S_normalized) << " ~ "
        << rational_approx(dens.S_normalized) << "\n";
  Json rep = detail::report_envelope(
      cfg, "singular-series", detail::task_json(cfg, ctx, cfg.d_list.front()),
      to_json(dens), ctx.budget);
  detail::write_file(out_dir, "singular_series_report.json",
                     rep.dump(2) + "\n");
  return kExitOk;
}

// ---- expsum ----------------------------------------------------------------

inline int run_expsum(const RunConfig& cfg, const std::string& out_dir,
                      std::ostream& human) {
  RunContext ctx(cfg);
  CharContext cc(*ctx.field);
  if (cfg.expsum_spec.is_null())
    throw config_error("expsum: config needs an 'expsum' section");
  ExpSumSpec spec;
  try {
    spec.r = poly_from_json(*ctx.field, cfg.expsum_spec.at("r"));
    spec.M = cfg.expsum_spec.contains("M")
                 ? poly_from_json(*ctx.field, cfg.expsum_spec.at("M"))
                 : Poly::one(*ctx.field);
    spec.a = cfg.expsum_spec.contains("a")
                 ? cfg.expsum_spec.at("a").get<std::vector<FqElem>>()
                 : ctx.pair.a;
    if (cfg.expsum_spec.contains("c"))
      for (const auto& cj : cfg.expsum_spec.at("c"))
        spec.c.push_back(poly_from_json(*ctx.field, cj));
    else
      spec.c.assign(std::size_t(cfg.n), Poly::zero(*ctx.field));
  } catch (const Json::exception& e) {
    throw config_error(std::string("expsum: ") + e.what());
  }
  CycInt naive = s_naive(cc, spec, *ctx.form, ctx.budget, cfg.workers);
  auto multi = s_multiplicative(cc, spec, *ctx.form, ctx.budget, cfg.workers);
  Json factors = Json::array();
  for (const auto& mf : multi.factors)
    factors.push_back(Json{{"prime_power", to_json(mf.prime_power)},
                           {"M", to_json(mf.M)},
                           {"residue", mf.residue},
                           {"value", to_json(mf.value)}});
  Json value{{"direct", to_json(naive)},
             {"multiplicative", to_json(multi.value)},
             {"factors", factors},
             {"agree", naive == multi.value}};
  if (multi.has_phase) {
    value["phase_residue"] = multi.phase_residue;
    value["phase"] = to_json(multi.phase);
  }
  auto e = naive.embed();
  human << "S = " << e.real() << (e.imag() < 0 ? " - " : " + ")
        << std::abs(e.imag()) << "i  (direct == multiplicative: "
        << (naive == multi.value ? "yes" : "NO") << ")\n";
  Json rep = detail::report_envelope(
      cfg, "expsum", detail::task_json(cfg, ctx, cfg.d_list.front()),
      std::move(value), ctx.budget);
  detail::write_file(out_dir, "expsum_report.json", rep.dump(2) + "\n");
  return naive == multi.value ? kExitOk : kExitIdentityFailure;
}

// ---- verify-identities -----------------------------------------------------

inline int run_verify(const RunConfig& cfg, const std::string& out_dir,
                      std::ostream& human) {
  RunContext ctx(cfg);
  const Field& f = *ctx.field;
  CharContext cc(f);
  std::mt19937_64 rng(cfg.seed);
  std::vector<detail::CheckLine> checks;
  auto record = [&](std::string name, std::string status, std::string det) {
    human << "[" << status << "] " << name
          << (det.empty() ? "" : " -- " + det) << "\n";
    checks.push_back({std::move(name), std::move(status), std::move(det)});
  };

  // orthogonality: direct character sums against the closed form
  {
    bool ok = true;
    for (int N = 0; N <= 3 && ok; ++N) {
      for (int j = -5; j <= 2 && ok; ++j)
        for (FqElem c = 1; c < f.q() && ok; ++c) {
          Laurent gamma = Laurent::monomial(f, j, c);
          CycInt direct = char_sum(cc, gamma, N);
          ok = direct.is_rational_int() &&
               Rational(direct.rational_value()) == char_sum_closed(gamma, N);
        }
      for (int it = 0; it < 50 && ok; ++it) {
        std::map<int, FqElem> m;
        for (int l = 0; l < 3; ++l)
          m[-5 + int(rng() % 8)] = FqElem(rng() % f.q());
        Laurent gamma = Laurent::from_coeff_map(f, m);
        CycInt direct = char_sum(cc, gamma, N);
        ok = direct.is_rational_int() &&
             Rational(direct.rational_value()) == char_sum_closed(gamma, N);
      }
    }
    record("orthogonality (char_sum vs closed form)", ok ? "EQUAL" : "UNEQUAL",
           "");
  }

  // theta integral: quadrature vs closed form
  {
    bool ok = true;
    for (int it = 0; it < 50 && ok; ++it) {
      std::map<int, FqElem> m;
      for (int l = 0; l < 2; ++l)
        m[-4 + int(rng() % 7)] = FqElem(rng() % f.q());
      Laurent gamma = Laurent::from_coeff_map(f, m);
      int D = std::max(1, gamma.top() + 1);
      auto integrand = [&](std::span<const Laurent> z) {
        return psi_eval(cc, z[0] * gamma);
      };
      ScaledCyc got = haar_quadrature(cc, 1, D, integrand, &ctx.budget);
      ok = got.v.is_rational_int() &&
           got.rational(f.q()) == theta_integral_closed(gamma, 0);
    }
    record("theta integral (quadrature vs closed form)",
           ok ? "EQUAL" : "UNEQUAL", "");
  }

  // t-power sums need the gradient argument, so theorem mode only
  if (cfg.identity_mode) {
    record("t-power sums", "SKIPPED", "identity mode");
  } else {
    bool ok = true;
    std::vector<Poly> c0(std::size_t(cfg.n), Poly::zero(f));
    for (int K = 1; K <= 3 && ok; ++K) {
      ExpSumSpec spec{Poly::t(f).pow(unsigned(K)), Poly::t(f), ctx.pair.a, c0};
      ok = s_naive(cc, spec, *ctx.form, ctx.budget, cfg.workers) ==
           s_tpower_closed(cc, K, ctx.pair.a, *ctx.form);
    }
    record("t-power sums (direct vs closed)", ok ? "EQUAL" : "UNEQUAL", "");
  }

  // multiplicativity on a seeded sample
  {
    bool ok = true;
    int done = 0;
    while (done < 6 && ok) {
      int dr = int(rng() % 3);
      std::vector<FqElem> rc(std::size_t(dr) + 1, 0);
      for (int i = 0; i < dr; ++i) rc[std::size_t(i)] = FqElem(rng() % f.q());
      rc.back() = 1;
      ExpSumSpec spec;
      spec.r = Poly(f, rc);
      spec.M = (rng() % 2) ? Poly::t(f) : Poly::one(f);
      for (int i = 0; i < cfg.n; ++i) {
        spec.a.push_back(ctx.pair.a[std::size_t(i)]);
        spec.c.emplace_back(
            f, std::vector<FqElem>{FqElem(rng() % f.q()), FqElem(rng() % f.q())});
      }
      long double cost = std::pow((long double)f.q(),
                                  cfg.n * r_M(spec).deg() + spec.r.deg());
      if (cost > 5e6) {
        spec = ExpSumSpec();
        continue;
      }
      ok = s_naive(cc, spec, *ctx.form, ctx.budget, cfg.workers) ==
           s_multiplicative(cc, spec, *ctx.form, ctx.budget, cfg.workers).value;
      ++done;
    }
    record("multiplicativity (sampled)", ok ? "EQUAL" : "UNEQUAL", "");
  }

  // point-count recursions at the prime t, against direct enumeration
  {
    long double direct_cost = std::pow((long double)f.q(), 4.0 * cfg.n);
    if (direct_cost > double(ctx.budget.cap())) {
      record("point-count recursions at t^4", "SKIPPED", "beyond budget");
    } else {
      Poly t = Poly::t(f);
      auto direct = count_S0_S1(*ctx.form, t, 4, ctx.budget,
                                CountMode::DIRECT, cfg.workers);
      auto rec = count_S0_S1(*ctx.form, t, 4, ctx.budget,
                             CountMode::RECURSIVE, cfg.workers);
      bool ok = direct.s0 == rec.s0 && direct.s1 == rec.s1;
      record("point-count recursions at t^4", ok ? "EQUAL" : "UNEQUAL",
             "S_0 = " + direct.s0.str());
    }
  }

  // circle dissection over the configured Q grid
  for (int d : cfg.d_list) {
    for (const Frac& Q : cfg.q_grid) {
      std::string name = "circle dissection d=" + std::to_string(d) +
                         " Q=" + frac_str(Q);
      CountTask task(*ctx.form, ctx.pair, d, cfg.identity_mode);
      auto rep = circle_decomposition_check(task, Q, ctx.budget, cfg.workers);
      record(name, rep.equal ? "EQUAL" : "UNEQUAL",
             "N = " + rep.lhs.str());
    }
  }

  // poisson at the configured moduli (theorem mode)
  if (cfg.identity_mode) {
    record("poisson summation", "SKIPPED", "identity mode");
  } else {
    std::vector<Poly> rs;
    if (cfg.poisson_r.empty()) {
      rs = {Poly::one(f), Poly::t(f)};
    } else {
      for (const auto& rj : cfg.poisson_r) rs.push_back(poly_from_json(f, rj));
    }
    int d = cfg.d_list.front();
    CountTask task(*ctx.form, ctx.pair, d, cfg.identity_mode);
    for (const Poly& r : rs) {
      auto rep = poisson_check(task, r, Laurent::zero(f), ctx.budget, 1,
                               cfg.workers);
      record("poisson r=" + r.str(),
             rep.equal && rep.truncation_null_ok ? "EQUAL" : "UNEQUAL", "");
    }
  }

  // window Hessian absolute value (theorem mode)
  if (cfg.identity_mode) {
    record("weight window Hessian", "SKIPPED", "identity mode");
  } else {
    WeightWindow win{ctx.form.get(), ctx.pair.b};
    bool ok = true;
    for (int it = 0; it < 100 && ok; ++it) {
      auto x = win.random_point(rng, 3);
      ok = window_hessian_abs(*ctx.form, std::span<const Laurent>(x)) ==
           qpow(f.q(), -cfg.n);
    }
    record("weight window |H(x)| = q^-n", ok ? "PASS" : "FAIL", "");
  }

  Json lines = Json::array();
  bool any_fail = false;
  for (const auto& c : checks) {
    lines.push_back(
        Json{{"name", c.name}, {"status", c.status}, {"detail", c.detail}});
    any_fail = any_fail || c.failed();
  }
  Json rep = detail::report_envelope(
      cfg, "verify-identities", detail::task_json(cfg, ctx, cfg.d_list.front()),
      std::move(lines), ctx.budget);
  detail::write_file(out_dir, "verify_report.json", rep.dump(2) + "\n");
  return any_fail ? kExitIdentityFailure : kExitOk;
}

// ---- report (merge CSV sweeps) ----------------------------------------------

inline int run_report(const std::vector<std::string>& files,
                      const std::string& out_dir, std::ostream& human) {
  if (files.empty()) throw config_error("report: no input files");
  std::string header;
  std::vector<std::string> rows;
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw config_error("report: cannot open " + path);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (first) {
        if (header.empty())
          header = line;
        else if (header != line)
          throw config_error("report: mismatched CSV headers");
        first = false;
        continue;
      }
      rows.push_back(line);
    }
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::ostringstream merged;
  merged << header << "\n";
  for (const auto& r : rows) merged << r << "\n";
  detail::write_file(out_dir, "merged.csv", merged.str());
  human << "merged " << files.size() << " files, " << rows.size() << " rows\n";
  return kExitOk;
}

// ---- dispatch ----------------------------------------------------------------

inline int run(const std::string& subcommand, const RunConfig& cfg,
               const std::string& out_dir, std::ostream& human,
               const std::vector<std::string>& files = {}) {
  try {
    if (subcommand == "count") return run_count(cfg, out_dir, human);
    if (subcommand == "predict") return run_predict(cfg, out_dir, human);
    if (subcommand == "singular-series")
      return run_singular_series(cfg, out_dir, human);
    if (subcommand == "expsum") return run_expsum(cfg, out_dir, human);
    if (subcommand == "verify-identities")
      return run_verify(cfg, out_dir, human);
    if (subcommand == "report") return run_report(files, out_dir, human);
    throw config_error("unknown subcommand: " + subcommand);
  } catch (const capacity_error& e) {
    human << "budget exhausted: " << e.what() << "\n";
    return kExitBudget;
  } catch (const config_error& e) {
    human << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace ffcm
