#pragma once
//
// Scenario pipeline: checks -> level (kappa route and/or descent) -> residuals
// -> levels of the asymptotic problems -> optional decomposition, and the
// penalty sweeps. Reports are JSON (schema in docs/report.schema.json) plus an
// optional CSV bundle, written atomically.
//

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccmp/config.hpp"
#include "ccmp/error.hpp"
#include "ccmp/function_space.hpp"
#include "ccmp/functional.hpp"
#include "ccmp/mountain_pass.hpp"
#include "ccmp/nonlinearity.hpp"
#include "ccmp/profile_decomposition.hpp"
#include "ccmp/sphere_maximizer.hpp"

namespace ccmp {

using json = nlohmann::ordered_json;

inline constexpr const char* kReportSchemaVersion = "1.0";

/// Process exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_nonconvergence = 3, exit_verification = 4 };

struct StageError {
  std::string stage;
  std::string kind;  // error class
  std::string message;
};

struct SharpLevel {
  std::string name;        // c_plus, c_minus, c_inf, c_plus_whole_space
  double c = 0.0;          // +inf when F_# vanishes
  std::string route;       // kappa, descent, shared (F_# = F), zero
  bool strict = false;     // c < c_# (1 - margin)
  bool nonstrict_ok = true;  // c <= c_# (1 + nonstrict_tol)
};

struct PenaltyRow {
  double value = 0.0;
  double lambda = 0.0;
  double c = 0.0;
  double c_sharp = 0.0;
  bool strict = false;
  bool nonstrict_ok = true;
  bool converged = true;
};

struct PenaltyTable {
  std::string parameter;
  std::string sharp_name;
  double margin = 0.04;
  double nonstrict_tol = 0.02;
  std::vector<PenaltyRow> rows;
  bool decreasing = true;  // c strictly decreasing along the sweep
};

struct ProfileSummary {
  std::string cls;
  double norm_sq = 0.0;
  double j_slope = 0.0;
  double y_slope = 0.0;
  bool escapes = false;
  double recovery_error = 0.0;  // |w - planted| / |planted| for planted sequences
};

struct DecompositionSummary {
  std::size_t length = 0;
  std::vector<ProfileSummary> profiles;
  double final_remainder = 0.0;
  double sum_norms = 0.0;
  double limsup_norm = 0.0;
  double norm_ratio = 0.0;
  bool norms_ok = false, separation_ok = false, remainder_ok = false;
  double split_lhs = 0.0, split_rhs = 0.0, split_gap = 0.0;
};

struct ScenarioReport {
  ScenarioConfig config;
  double lambda = 0.0;                 // effective mass term
  std::optional<double> lambda_1;      // ball scenarios
  std::optional<GrowthReport> growth;
  std::optional<bool> ar_pass;
  std::optional<LevelResult> level;
  std::vector<SharpLevel> sharp;
  std::optional<double> gradient_dual;      // |G'(u)|_* / |u|
  std::optional<double> gradient_fd_error;  // central-difference mismatch (relative)
  std::optional<double> nehari;             // relative
  std::optional<PohozaevResidual> pohozaev;
  std::optional<ShootingResult> shooting;
  std::optional<double> shooting_gap;       // |c - c_shoot| / c_shoot
  std::optional<PohozaevResidual> shooting_pohozaev;
  std::optional<LevelResult> cross_level;   // the other route
  std::optional<double> cross_gap;          // |c - c_cross| / c_cross
  std::optional<KappaComparison> kappa_table;
  std::optional<DecompositionSummary> decomposition;
  std::optional<PenaltyTable> penalty;
  std::optional<bool> expectation_ok;
  std::vector<StageError> errors;
  std::vector<std::pair<std::string, double>> timing;  // seconds per stage

  bool verification_failed() const {
    if (growth && !growth->pass) return true;
    if (ar_pass && !*ar_pass) return true;
    for (const auto& s : sharp)
      if (!s.nonstrict_ok) return true;
    if (expectation_ok && !*expectation_ok) return true;
    if (decomposition &&
        !(decomposition->norms_ok && decomposition->separation_ok && decomposition->remainder_ok))
      return true;
    if (penalty)
      for (const auto& r : penalty->rows)
        if (!r.nonstrict_ok) return true;
    return false;
  }
  bool nonconverged() const {
    if (!errors.empty()) return true;
    if (level && !level->converged) return true;
    if (cross_level && !cross_level->converged) return true;
    if (penalty)
      for (const auto& r : penalty->rows)
        if (!r.converged) return true;
    return false;
  }
  int exit_code() const {
    if (nonconverged()) return exit_nonconvergence;
    if (verification_failed()) return exit_verification;
    return exit_ok;
  }
};

namespace detail {

inline SampleBox sample_box_for(const NonlinearitySpec& spec) {
  SampleBox box;
  if (!spec.autonomous()) box.positions = {0.0, 0.5, 1.0, 2.0, 4.0};
  return box;
}

inline GrowthRegime growth_regime_for(Regime r) {
  switch (r) {
    case Regime::critical_D12: return GrowthRegime::critical;
    case Regime::subcritical_H1: return GrowthRegime::subcritical;
    case Regime::ball_domain: return GrowthRegime::bounded_domain;
  }
  return GrowthRegime::critical;
}

inline LevelOptions level_options(const ScenarioConfig& c) {
  LevelOptions o;
  o.route = c.solver.route;
  o.descent.tol_g = c.solver.tol_g;
  o.descent.max_outer = c.solver.max_outer;
  o.descent.step = c.solver.step;
  o.descent.window = c.solver.window;
  o.descent.max_nodes = static_cast<std::size_t>(c.solver.max_nodes);
  o.path_nodes = c.solver.path_nodes;
  o.kappa.starts = c.solver.kappa_starts;
  o.kappa.tol = c.solver.kappa_tol;
  o.kappa.stall_tol = c.solver.kappa_stall;
  o.kappa.base_width = c.solver.kappa_width;
  o.strict_margin = c.verify.strict_margin;
  o.nonstrict_tol = c.verify.nonstrict_tol;
  return o;
}

inline double effective_lambda(const ScenarioConfig& c, const Grid& g, std::optional<double>& lambda_1) {
  if (c.regime != Regime::ball_domain) return c.lambda;
  lambda_1 = lowest_dirichlet_eigenvalue(g);
  return c.bn_fraction ? -*c.bn_fraction * *lambda_1 : c.lambda;
}

/// Runs `fn`, recording its wall time and converting toolkit errors into stage errors.
inline bool stage(ScenarioReport& rep, const std::string& name, const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  auto record = [&](const char* kind, const std::exception& e) {
    rep.errors.push_back({name, kind, e.what()});
    ok = false;
  };
  try {
    fn();
  } catch (const DivergenceError& e) {
    record("DivergenceError", e);
  } catch (const NoMountainError& e) {
    record("NoMountainError", e);
  } catch (const BracketError& e) {
    record("BracketError", e);
  } catch (const OutOfRange& e) {
    record("OutOfRange", e);
  } catch (const InvalidArgument& e) {
    record("InvalidArgument", e);
  } catch (const Error& e) {
    record("Error", e);
  }
  rep.timing.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return ok;
}

/// Central-difference check of the discrete gradient along a seeded random direction,
/// at 0.8 u: at a critical point the directional derivative vanishes and a relative
/// comparison would only measure rounding.
inline double gradient_fd_error(const EnergyFunctional& G, const DiscreteFunction& u_crit, std::uint64_t seed) {
  const DiscreteFunction u = u_crit * 0.8;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto& g = *G.grid();
  // smooth direction: random combination of a few bumps, scaled to |u|
  std::vector<double> v(g.size(), 0.0);
  const double ext = g.is_line() ? g.extent() : std::min(g.extent(), 10.0);
  for (int b = 0; b < 4; ++b) {
    const double a = normal(rng), c = g.is_line() ? 0.25 * ext * normal(rng) : 0.0, w = 0.5 + std::abs(normal(rng));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += a * std::exp(-std::pow((g.node(i) - c) / w, 2));
  }
  DiscreteFunction dir(G.grid(), std::move(v));
  const double scale = std::sqrt(G.norm_sq(u) / std::max(G.norm_sq(dir), 1e-300));
  dir = dir * scale;
  const auto grad = energy_gradient(G, u);
  double analytic = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) analytic += grad[i] * dir[i];
  // Richardson-extrapolated central difference
  auto central = [&](double h) { return (energy(G, u + dir * h) - energy(G, u - dir * h)) / (2.0 * h); };
  const double h = 1e-3;
  const double fd = (4.0 * central(h / 2) - central(h)) / 3.0;
  const double ref = std::max({std::abs(analytic), std::abs(fd), 1e-12 * G.norm_sq(u)});
  return std::abs(fd - analytic) / ref;
}

/// Level of an asymptotic problem; reuses c when F_# coincides with F.
inline SharpLevel sharp_level(const std::string& name, const EnergyFunctional& Gs, bool same_as_primary, double c,
                              const LevelOptions& o) {
  SharpLevel s;
  s.name = name;
  if (same_as_primary) {
    s.c = c;
    s.route = "shared";
  } else {
    LevelOptions oo = o;
    oo.seed.reset();
    const auto r = mp_level(Gs, oo);
    s.c = r.c;
    s.route = r.route;
  }
  s.strict = c < s.c * (1.0 - o.strict_margin);
  s.nonstrict_ok = c <= s.c * (1.0 + o.nonstrict_tol);
  return s;
}

/// The problems at infinity of a scenario, as (name, functional, coincides-with-F).
struct SharpProblem {
  std::string name;
  EnergyFunctional G;
  bool same;
};

inline std::vector<SharpProblem> sharp_problems(const ScenarioConfig& c, const EnergyFunctional& G) {
  std::vector<SharpProblem> out;
  const auto& spec = G.spec();
  const auto fam = asymptotic_family(spec, sample_box_for(spec));
  auto usable = [](const AsymptoticLimit& l) { return l.available && l.F && l.certified; };
  switch (c.regime) {
    case Regime::critical_D12: {
      const bool self = spec.selfsimilar_by_construction();
      for (auto [name, lim] : {std::pair{"c_plus", &fam.Fplus}, std::pair{"c_minus", &fam.Fminus}}) {
        if (!usable(*lim)) continue;
        out.push_back({name, G.with_spec(*lim->F), self});
      }
      break;
    }
    case Regime::subcritical_H1: {
      if (!G.grid()->is_line() && spec.autonomous()) {
        out.push_back({"c_inf", G, true});
      } else if (usable(fam.Finf)) {
        out.push_back({"c_inf", G.with_spec(*fam.Finf.F), spec.autonomous()});
      }
      break;
    }
    case Regime::ball_domain: {
      // problem at infinity of a concentrating sequence: F_+ on the whole space, lambda = 0
      if (!usable(fam.Fplus)) break;
      auto whole = Grid::radial(c.grid.N, c.verify.sharp_R, c.verify.sharp_M, Spacing::geometric,
                                DomainKind::whole_space, c.verify.sharp_stretch);
      out.push_back({"c_plus_whole_space", EnergyFunctional(whole, 0.0, *fam.Fplus.F, Regime::critical_D12), false});
      break;
    }
  }
  return out;
}

/// Planted two-profile sequence u_k = w + g_k (amplitude w): dilations j_k = k on
/// radial grids, translations y_k = speed k - offset on lines.
struct Planted {
  std::vector<DiscreteFunction> seq;
  DiscreteFunction w, w_inf;
};

inline Planted planted_sequence(const ScenarioConfig& c, const GridPtr& grid) {
  const auto& d = c.decompose;
  DiscreteFunction w = grid->is_line()
                           ? DiscreteFunction::sample(grid, [&](double x) { return 1.0 / std::cosh(x / d.width); })
                           : talenti_bump(grid, d.width);
  DiscreteFunction wi = w * d.amplitude;
  BumpSchedule b{wi, {}, {}};
  for (int k = 0; k < d.length; ++k) {
    b.j.push_back(grid->is_line() ? 0 : k);
    b.y.push_back(grid->is_line() ? d.speed * k - d.offset : 0.0);
  }
  auto seq = synth_multibump(w, {b}, static_cast<std::size_t>(d.length), 2.0);
  return {std::move(seq), std::move(w), std::move(wi)};
}

inline DecompositionSummary summarize(const std::vector<DiscreteFunction>& seq, const Decomposition& dec,
                                      const NonlinearitySpec& spec, double tol_remainder,
                                      const std::vector<DiscreteFunction>* truth) {
  DecompositionSummary s;
  s.length = seq.size();
  for (std::size_t a = 0; a < dec.items.size(); ++a) {
    const auto& it = dec.items[a];
    ProfileSummary p{to_string(it.cls), it.norm_sq, it.j_slope, it.y_slope, it.escapes, 0.0};
    if (truth && a < truth->size()) {
      const auto& t = (*truth)[a];
      p.recovery_error = std::sqrt(space_norm_sq(it.w - t, dec.lambda) / space_norm_sq(t, dec.lambda));
    }
    s.profiles.push_back(p);
  }
  s.final_remainder = dec.remainder.empty() ? 0.0 : dec.remainder.back();
  s.sum_norms = dec.sum_norms;
  s.limsup_norm = dec.limsup_norm;
  const auto chk = verify_decomposition(seq, dec, tol_remainder);
  s.norm_ratio = chk.norm_ratio;
  s.norms_ok = chk.norms_ok;
  s.separation_ok = chk.separation_ok;
  s.remainder_ok = chk.remainder_ok;
  const auto split = energy_split(spec, seq, dec);
  s.split_lhs = split.lhs;
  s.split_rhs = split.rhs;
  s.split_gap = split.gap;
  return s;
}

}  // namespace detail

/// Sweeps one parameter of the scenario and compares each level with the level of the
/// problem at infinity of the unperturbed family (computed once).
inline PenaltyTable penalty_experiment(const ScenarioConfig& base, PenaltyParameter parameter,
                                       const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("penalty_experiment: empty sweep");
  for (double v : values)
    if (!(v >= 0.0)) throw InvalidArgument("penalty_experiment: sweep values must be nonnegative");
  PenaltyTable tab;
  tab.parameter = to_string(parameter);
  tab.margin = base.verify.strict_margin;
  tab.nonstrict_tol = base.verify.nonstrict_tol;
  const auto grid = build_grid(base);
  const auto opts = detail::level_options(base);

  auto configure = [&](double v) {
    ScenarioConfig c = base;
    switch (parameter) {
      case PenaltyParameter::amplitude: {
        bool found = false;
        for (auto& [k, val] : c.nonlinearity.entries)
          if (k == "amplitude") {
            val = detail::fmt(v);
            found = true;
          }
        if (!found || *c.nonlinearity.get("kind") != "modulation")
          throw InvalidArgument("penalty_experiment: amplitude sweeps need a modulation nonlinearity");
        break;
      }
      case PenaltyParameter::bn_fraction:
        if (c.regime != Regime::ball_domain) throw InvalidArgument("penalty_experiment: bn_fraction needs a ball");
        if (!(v < 1.0)) throw InvalidArgument("penalty_experiment: bn_fraction must stay below 1");
        c.lambda = 0.0;
        c.bn_fraction = v;
        break;
      case PenaltyParameter::lambda:
        c.lambda = v;
        break;
    }
    return c;
  };

  for (double v : values) {
    const auto c = configure(v);
    std::optional<double> l1;
    const double lam = detail::effective_lambda(c, *grid, l1);
    EnergyFunctional G(grid, lam, build_nonlinearity(c), c.regime);
    const auto r = mp_level(G, opts);
    PenaltyRow row;
    row.value = v;
    row.lambda = lam;
    row.c = r.c;
    row.converged = r.converged;
    tab.rows.push_back(row);
  }
  // problem at infinity of the unperturbed member (value 0)
  const auto c0 = configure(0.0);
  std::optional<double> l10;
  EnergyFunctional G0(grid, detail::effective_lambda(c0, *grid, l10), build_nonlinearity(c0), c0.regime);
  const auto probs = detail::sharp_problems(c0, G0);
  if (probs.empty()) throw InvalidArgument("penalty_experiment: no certified problem at infinity");
  std::optional<double> c_at_zero;
  for (const auto& row : tab.rows)
    if (row.value == 0.0) c_at_zero = row.c;
  const bool reuse = probs.front().same && c_at_zero.has_value();
  const auto sharp = detail::sharp_level(probs.front().name, probs.front().G, reuse, reuse ? *c_at_zero : 0.0, opts);
  tab.sharp_name = sharp.name;
  for (auto& row : tab.rows) {
    row.c_sharp = sharp.c;
    row.strict = row.c < sharp.c * (1.0 - tab.margin);
    row.nonstrict_ok = row.c <= sharp.c * (1.0 + tab.nonstrict_tol);
  }
  for (std::size_t i = 1; i < tab.rows.size(); ++i)
    if (values[i] > values[i - 1] && !(tab.rows[i].c < tab.rows[i - 1].c)) tab.decreasing = false;
  return tab;
}

/// Runs the regime-appropriate pipeline. Stage failures are recorded, never thrown.
inline ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  ScenarioReport rep;
  rep.config = cfg;
  GridPtr grid;
  std::optional<NonlinearitySpec> spec;
  std::optional<EnergyFunctional> G;
  const auto opts = detail::level_options(cfg);

  if (!detail::stage(rep, "setup", [&] {
        grid = build_grid(cfg);
        spec = build_nonlinearity(cfg);
        rep.lambda = detail::effective_lambda(cfg, *grid, rep.lambda_1);
        G.emplace(grid, rep.lambda, *spec, cfg.regime);
      }))
    return rep;

  // growth and AR come before any solve
  detail::stage(rep, "checks", [&] {
    const auto box = detail::sample_box_for(*spec);
    if (cfg.verify.growth) rep.growth = check_growth(*spec, detail::growth_regime_for(cfg.regime), box);
    if (cfg.verify.ar) rep.ar_pass = check_AR(*spec, cfg.mu, box);
  });
  if ((rep.growth && !rep.growth->pass) || (rep.ar_pass && !*rep.ar_pass)) return rep;

  const bool solved = detail::stage(rep, "level", [&] { rep.level = mp_level(*G, opts); });

  if (solved && rep.level->candidate) {
    const auto& u = *rep.level->candidate;
    detail::stage(rep, "residuals", [&] {
      const double nu = std::sqrt(G->norm_sq(u));
      rep.gradient_dual = gradient_residual(*G, u).dual_norm / nu;
      if (cfg.verify.gradient) rep.gradient_fd_error = detail::gradient_fd_error(*G, u, cfg.seed);
      if (cfg.verify.nehari) rep.nehari = std::abs(nehari_residual(*G, u)) / G->norm_sq(u);
      if (cfg.verify.pohozaev && spec->autonomous() && cfg.regime != Regime::ball_domain)
        rep.pohozaev = pohozaev_residual(*G, u);
    });
  }

  if (solved && cfg.verify.sharp) {
    detail::stage(rep, "sharp", [&] {
      for (const auto& p : detail::sharp_problems(cfg, *G))
        rep.sharp.push_back(detail::sharp_level(p.name, p.G, p.same, rep.level->c, opts));
    });
  }

  if (cfg.verify.shooting) {
    detail::stage(rep, "shooting", [&] {
      if (grid->domain() == DomainKind::ball) throw InvalidArgument("shooting cross-check runs on whole-space grids");
      rep.shooting = radial_shooting_oracle(cfg.grid.N, rep.lambda, *spec, {cfg.verify.shoot_lo, cfg.verify.shoot_hi},
                                            grid);
      if (rep.level) rep.shooting_gap = std::abs(rep.level->c - rep.shooting->level) / rep.shooting->level;
      rep.shooting_pohozaev = pohozaev_residual(*G, rep.shooting->u);
    });
  }

  if (cfg.verify.cross_route && solved) {
    detail::stage(rep, "cross_route", [&] {
      LevelOptions o = opts;
      o.route = rep.level->route == "kappa" ? LevelRoute::descent : LevelRoute::kappa;
      rep.cross_level = mp_level(*G, o);
      rep.cross_gap = std::abs(rep.level->c - rep.cross_level->c) / std::abs(rep.cross_level->c);
    });
  }

  if (cfg.verify.kappa_table) {
    detail::stage(rep, "kappa_table", [&] {
      KappaOptions ko = opts.kappa;
      ko.lambda = rep.lambda;
      rep.kappa_table = compare_kappas(*spec, grid, ko, cfg.verify.strict_margin);
    });
  }

  if (cfg.decompose.enabled) {
    detail::stage(rep, "decompose", [&] {
      const auto planted = detail::planted_sequence(cfg, grid);
      DecomposeOptions d;
      d.tol_remainder = cfg.decompose.tol_remainder;
      d.max_profiles = cfg.decompose.max_profiles;
      d.j_min = cfg.decompose.j_min;
      d.lambda = grid->is_line() ? (rep.lambda > 0.0 ? rep.lambda : 1.0) : 1.0;
      d.template_width = cfg.decompose.width;
      const auto dec = decompose(planted.seq, 2.0, d);
      const std::vector<DiscreteFunction> truth{planted.w, planted.w_inf};
      rep.decomposition = detail::summarize(planted.seq, dec, *spec, cfg.decompose.tol_remainder, &truth);
    });
  }

  if (cfg.penalty.parameter) {
    detail::stage(rep, "penalty",
                  [&] { rep.penalty = penalty_experiment(cfg, *cfg.penalty.parameter, cfg.penalty.values); });
  }

  if (!std::isnan(cfg.verify.expect_c) && rep.level)
    rep.expectation_ok = std::abs(rep.level->c - cfg.verify.expect_c) <= cfg.verify.expect_tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace detail {
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
inline json pohozaev_json(const PohozaevResidual& p) {
  return {{"absolute", num(p.absolute)},
          {"relative", num(p.relative)},
          {"printed_absolute", num(p.printed_absolute)},
          {"printed_relative", num(p.printed_relative)}};
}
}  // namespace detail

/// Report body (deterministic) plus the separate "timing" member.
inline json report_json(const ScenarioReport& r) {
  using detail::num;
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["scenario"] = r.config.name;
  j["seed"] = r.config.seed;
  j["config"] = emit_config(r.config);
  j["regime"] = to_string(r.config.regime);
  j["lambda"] = num(r.lambda);
  j["lambda_1"] = r.lambda_1 ? num(*r.lambda_1) : json(nullptr);

  json checks = json::object();
  if (r.growth) {
    json consts = json::object();
    for (const auto& [k, v] : r.growth->constants) consts[k] = num(v);
    checks["growth"] = {{"regime", to_string(r.growth->regime)},
                        {"pass", r.growth->pass},
                        {"constants", consts},
                        {"notes", r.growth->notes}};
  }
  if (r.ar_pass) checks["ar"] = {{"mu", r.config.mu}, {"pass", *r.ar_pass}};
  j["checks"] = checks;

  json levels = json::object();
  if (r.level) {
    levels["c"] = num(r.level->c);
    levels["route"] = r.level->route;
    levels["converged"] = r.level->converged;
    levels["iterations"] = r.level->iters;
  }
  for (const auto& s : r.sharp) levels[s.name] = num(s.c);
  j["levels"] = levels;

  json verdicts = json::array();
  for (const auto& s : r.sharp)
    verdicts.push_back({{"against", s.name},
                        {"route", s.route},
                        {"nonstrict_ok", s.nonstrict_ok},
                        {"nonstrict_tol", r.config.verify.nonstrict_tol},
                        {"strict", s.strict},
                        {"margin", r.config.verify.strict_margin}});
  j["verdicts"] = verdicts;

  json res = json::object();
  if (r.gradient_dual) res["gradient_dual_relative"] = num(*r.gradient_dual);
  if (r.gradient_fd_error) res["gradient_fd_error"] = num(*r.gradient_fd_error);
  if (r.nehari) res["nehari_relative"] = num(*r.nehari);
  if (r.pohozaev) res["pohozaev"] = detail::pohozaev_json(*r.pohozaev);
  j["residuals"] = res;

  if (r.shooting) {
    j["shooting"] = {{"alpha", num(r.shooting->alpha)},
                     {"level", num(r.shooting->level)},
                     {"r_cut", num(r.shooting->r_cut)},
                     {"gap", r.shooting_gap ? num(*r.shooting_gap) : json(nullptr)},
                     {"pohozaev", detail::pohozaev_json(*r.shooting_pohozaev)}};
  }
  if (r.cross_level) {
    j["cross_route"] = {{"route", r.cross_level->route},
                        {"c", num(r.cross_level->c)},
                        {"converged", r.cross_level->converged},
                        {"gap", r.cross_gap ? num(*r.cross_gap) : json(nullptr)}};
  }
  if (r.kappa_table) {
    const auto& k = *r.kappa_table;
    j["kappa_table"] = {{"kappa1", num(k.kappa1)},
                        {"kappa_plus1", k.kappa_plus1 ? num(*k.kappa_plus1) : json(nullptr)},
                        {"kappa_minus1", k.kappa_minus1 ? num(*k.kappa_minus1) : json(nullptr)},
                        {"strict", k.strict},
                        {"margin", k.margin}};
  }
  if (r.decomposition) {
    const auto& d = *r.decomposition;
    json profs = json::array();
    for (const auto& p : d.profiles)
      profs.push_back({{"class", p.cls},
                       {"norm_sq", num(p.norm_sq)},
                       {"j_slope", num(p.j_slope)},
                       {"y_slope", num(p.y_slope)},
                       {"escapes", p.escapes},
                       {"recovery_error", num(p.recovery_error)}});
    j["decomposition"] = {{"length", d.length},
                          {"profiles", profs},
                          {"final_remainder", num(d.final_remainder)},
                          {"sum_norms", num(d.sum_norms)},
                          {"limsup_norm", num(d.limsup_norm)},
                          {"norm_ratio", num(d.norm_ratio)},
                          {"norms_ok", d.norms_ok},
                          {"separation_ok", d.separation_ok},
                          {"remainder_ok", d.remainder_ok},
                          {"energy_split", {{"lhs", num(d.split_lhs)}, {"rhs", num(d.split_rhs)}, {"gap", num(d.split_gap)}}}};
  }
  if (r.penalty) {
    const auto& p = *r.penalty;
    json rows = json::array();
    for (const auto& row : p.rows)
      rows.push_back({{"value", num(row.value)},
                      {"lambda", num(row.lambda)},
                      {"c", num(row.c)},
                      {"c_sharp", num(row.c_sharp)},
                      {"strict", row.strict},
                      {"nonstrict_ok", row.nonstrict_ok},
                      {"converged", row.converged}});
    j["penalty"] = {{"parameter", p.parameter},
                    {"against", p.sharp_name},
                    {"margin", p.margin},
                    {"nonstrict_tol", p.nonstrict_tol},
                    {"decreasing", p.decreasing},
                    {"rows", rows}};
  }
  if (r.expectation_ok) j["expectation_ok"] = *r.expectation_ok;
  json errs = json::array();
  for (const auto& e : r.errors) errs.push_back({{"stage", e.stage}, {"kind", e.kind}, {"message", e.message}});
  j["errors"] = errs;
  j["exit_code"] = r.exit_code();
  json timing = json::object();
  for (const auto& [k, v] : r.timing) timing[k] = v;
  j["timing"] = timing;
  return j;
}

/// Writes `text` to `path` through a temporary file in the same directory and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("write_atomic: cannot open " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error("write_atomic: write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

enum class ReportFormat { json, csv_bundle };

/// Emits the report into `dir`: <name>.json, and for csv_bundle also the candidate
/// profile and the penalty / kappa tables as CSV. Returns the files written.
inline std::vector<std::filesystem::path> emit_report(const ScenarioReport& r, const std::filesystem::path& dir,
                                                      ReportFormat format = ReportFormat::json) {
  std::vector<std::filesystem::path> out;
  const std::string stem = r.config.name;
  const auto jpath = dir / (stem + ".json");
  write_atomic(jpath, report_json(r).dump(2) + "\n");
  out.push_back(jpath);
  if (format != ReportFormat::csv_bundle) return out;
  if (r.level && r.level->candidate) {
    std::ostringstream os;
    write_csv(*r.level->candidate, os);
    const auto p = dir / (stem + "_candidate.csv");
    write_atomic(p, os.str());
    out.push_back(p);
  }
  if (r.penalty) {
    std::ostringstream os;
    os << std::setprecision(17) << r.penalty->parameter << ",lambda,c,c_sharp,strict\n";
    for (const auto& row : r.penalty->rows)
      os << row.value << "," << row.lambda << "," << row.c << "," << row.c_sharp << "," << (row.strict ? 1 : 0) << "\n";
    const auto p = dir / (stem + "_penalty.csv");
    write_atomic(p, os.str());
    out.push_back(p);
  }
  if (r.kappa_table) {
    std::ostringstream os;
    os << std::setprecision(17) << "which,kappa1\nkappa," << r.kappa_table->kappa1 << "\n";
    if (r.kappa_table->kappa_plus1) os << "kappa_plus," << *r.kappa_table->kappa_plus1 << "\n";
    if (r.kappa_table->kappa_minus1) os << "kappa_minus," << *r.kappa_table->kappa_minus1 << "\n";
    const auto p = dir / (stem + "_kappa.csv");
    write_atomic(p, os.str());
    out.push_back(p);
  }
  return out;
}

}  // namespace ccmp
