// Command-line front end: solve, kappa, penalty, decompose, pohozaev, report.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccmp/scenario.hpp"

namespace fs = std::filesystem;
using namespace ccmp;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> tol;
  bool quiet = false;
};

ScenarioConfig load(const std::string& path, const Common& c) {
  auto cfg = load_config(path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.tol) {
    if (!(*c.tol > 0.0)) throw ConfigError("--tol must be positive");
    cfg.solver.tol_g = *c.tol;
  }
  if (c.out) cfg.output.dir = *c.out;
  return cfg;
}

void say(const Common& c, const std::string& s) {
  if (!c.quiet) std::cout << s << '\n';
}

std::string fmt(double x, int prec = 8) {
  std::ostringstream os;
  os << std::setprecision(prec) << x;
  return os.str();
}

int cmd_solve(const std::string& path, const Common& c) {
  const auto cfg = load(path, c);
  const auto rep = run_scenario(cfg);
  const auto files =
      emit_report(rep, cfg.output.dir, cfg.output.csv ? ReportFormat::csv_bundle : ReportFormat::json);
  if (rep.level) say(c, cfg.name + ": c = " + fmt(rep.level->c) + " (" + rep.level->route + ")");
  for (const auto& s : rep.sharp)
    say(c, "  " + s.name + " = " + fmt(s.c) + (s.nonstrict_ok ? "  c <= c_#" : "  c > c_# (violation)") +
               (s.strict ? "  strict (margin " + fmt(rep.config.verify.strict_margin, 3) + ")" : ""));
  if (rep.penalty)
    for (const auto& r : rep.penalty->rows)
      say(c, "  " + rep.penalty->parameter + " = " + fmt(r.value, 4) + ": c = " + fmt(r.c) + ", " +
                 rep.penalty->sharp_name + " = " + fmt(r.c_sharp) + (r.strict ? "  strict" : ""));
  for (const auto& e : rep.errors) std::cerr << "stage " << e.stage << ": " << e.kind << ": " << e.message << '\n';
  for (const auto& f : files) say(c, "wrote " + f.string());
  return rep.exit_code();
}

int cmd_kappa(const std::string& path, const Common& c) {
  const auto cfg = load(path, c);
  const auto grid = build_grid(cfg);
  const auto spec = build_nonlinearity(cfg);
  std::optional<double> l1;
  KappaOptions ko = detail::level_options(cfg).kappa;
  ko.lambda = detail::effective_lambda(cfg, *grid, l1);
  const auto cmp = compare_kappas(spec, grid, ko, cfg.verify.strict_margin);
  say(c, "kappa(1) = " + fmt(cmp.kappa1, 10));
  say(c, "kappa_+(1) = " + (cmp.kappa_plus1 ? fmt(*cmp.kappa_plus1, 10) : std::string("unavailable")));
  say(c, "kappa_-(1) = " + (cmp.kappa_minus1 ? fmt(*cmp.kappa_minus1, 10) : std::string("unavailable")));
  say(c, std::string("strict: ") + (cmp.strict ? "yes" : "no") + " (margin " + fmt(cmp.margin, 3) + ")");
  json j{{"schema_version", kReportSchemaVersion},
         {"scenario", cfg.name},
         {"seed", cfg.seed},
         {"kappa1", cmp.kappa1},
         {"kappa_plus1", cmp.kappa_plus1 ? json(*cmp.kappa_plus1) : json(nullptr)},
         {"kappa_minus1", cmp.kappa_minus1 ? json(*cmp.kappa_minus1) : json(nullptr)},
         {"strict", cmp.strict},
         {"margin", cmp.margin}};
  write_atomic(fs::path(cfg.output.dir) / (cfg.name + "_kappa.json"), j.dump(2) + "\n");
  return exit_ok;
}

// "amplitude=0,0.5,1"
std::pair<PenaltyParameter, std::vector<double>> parse_sweep(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw ConfigError("--sweep expects parameter=v1,v2,...");
  const std::string name = detail::trim(s.substr(0, eq));
  PenaltyParameter p;
  if (name == "amplitude") p = PenaltyParameter::amplitude;
  else if (name == "bn_fraction") p = PenaltyParameter::bn_fraction;
  else if (name == "lambda") p = PenaltyParameter::lambda;
  else throw ConfigError("--sweep: unknown parameter '" + name + "'");
  return {p, detail::parse_list(s.substr(eq + 1), name, 0)};
}

int cmd_penalty(const std::string& path, const std::string& sweep, const Common& c) {
  auto cfg = load(path, c);
  if (!sweep.empty()) {
    auto [p, v] = parse_sweep(sweep);
    cfg.penalty.parameter = p;
    cfg.penalty.values = std::move(v);
  }
  if (!cfg.penalty.parameter) throw ConfigError("no sweep: give --sweep or a [penalty] section");
  const auto tab = penalty_experiment(cfg, *cfg.penalty.parameter, cfg.penalty.values);
  say(c, tab.parameter + "  c  " + tab.sharp_name + "  strict");
  json rows = json::array();
  bool ok = true;
  for (const auto& r : tab.rows) {
    say(c, fmt(r.value, 4) + "  " + fmt(r.c) + "  " + fmt(r.c_sharp) + "  " + (r.strict ? "yes" : "no"));
    rows.push_back({{"value", r.value}, {"c", r.c}, {"c_sharp", r.c_sharp}, {"strict", r.strict},
                    {"nonstrict_ok", r.nonstrict_ok}, {"converged", r.converged}});
    ok = ok && r.nonstrict_ok;
  }
  json j{{"schema_version", kReportSchemaVersion}, {"scenario", cfg.name}, {"seed", cfg.seed},
         {"parameter", tab.parameter}, {"against", tab.sharp_name}, {"margin", tab.margin},
         {"decreasing", tab.decreasing}, {"rows", rows}};
  write_atomic(fs::path(cfg.output.dir) / (cfg.name + "_penalty.json"), j.dump(2) + "\n");
  for (const auto& r : tab.rows)
    if (!r.converged) return exit_nonconvergence;
  return ok ? exit_ok : exit_verification;
}

int cmd_decompose(const std::string& path, const std::string& dir, const Common& c) {
  const auto cfg = load(path, c);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.size() < 8) throw ConfigError("decompose: need at least 8 CSV profiles in " + dir);
  std::vector<DiscreteFunction> seq;
  for (const auto& f : files) seq.push_back(read_csv(f.string()));
  DecomposeOptions d;
  d.tol_remainder = cfg.decompose.tol_remainder;
  d.max_profiles = cfg.decompose.max_profiles;
  d.j_min = cfg.decompose.j_min;
  d.template_width = cfg.decompose.width;
  if (seq.front().grid()->is_line() && cfg.lambda > 0.0) d.lambda = cfg.lambda;
  const auto dec = decompose(seq, 2.0, d);
  const auto s = detail::summarize(seq, dec, build_nonlinearity(cfg), d.tol_remainder, nullptr);
  json profs = json::array();
  for (const auto& p : s.profiles) {
    say(c, p.cls + "  |w|^2 = " + fmt(p.norm_sq) + "  j-slope " + fmt(p.j_slope, 3) + "  y-slope " + fmt(p.y_slope, 3));
    profs.push_back({{"class", p.cls}, {"norm_sq", p.norm_sq}, {"j_slope", p.j_slope}, {"y_slope", p.y_slope},
                     {"escapes", p.escapes}});
  }
  say(c, "remainder " + fmt(s.final_remainder, 4) + ", ledger " + fmt(s.norm_ratio, 5) + ", split gap " +
             fmt(s.split_gap, 4));
  json j{{"schema_version", kReportSchemaVersion}, {"scenario", cfg.name}, {"seed", cfg.seed},
         {"length", seq.size()}, {"profiles", profs}, {"final_remainder", s.final_remainder},
         {"norm_ratio", s.norm_ratio}, {"norms_ok", s.norms_ok}, {"separation_ok", s.separation_ok},
         {"remainder_ok", s.remainder_ok}, {"split_gap", s.split_gap}};
  write_atomic(fs::path(cfg.output.dir) / (cfg.name + "_decomposition.json"), j.dump(2) + "\n");
  return s.norms_ok && s.separation_ok && s.remainder_ok ? exit_ok : exit_verification;
}

int cmd_pohozaev(const std::string& path, const std::string& profile, const Common& c) {
  const auto cfg = load(path, c);
  const auto u = read_csv(profile);
  std::optional<double> l1;
  const double lam = detail::effective_lambda(cfg, *u.grid(), l1);
  EnergyFunctional G(u.grid(), lam, build_nonlinearity(cfg), cfg.regime);
  const auto p = pohozaev_residual(G, u);
  const double nu = G.norm_sq(u);
  say(c, "energy            " + fmt(energy(G, u), 10));
  say(c, "pohozaev relative " + fmt(p.relative, 4) + " (absolute " + fmt(p.absolute, 4) + ")");
  if (std::isfinite(p.printed_relative))
    say(c, "printed variant   " + fmt(p.printed_relative, 4) + " (absolute " + fmt(p.printed_absolute, 4) + ")");
  say(c, "nehari relative   " + fmt(std::abs(nehari_residual(G, u)) / nu, 4));
  say(c, "gradient relative " + fmt(gradient_residual(G, u).dual_norm / std::sqrt(nu), 4));
  const double tol = c.tol.value_or(1e-2);
  return p.relative <= tol ? exit_ok : exit_verification;
}

int cmd_report(const std::string& dir, const Common& c) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json" && e.path().filename() != "summary.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  json rows = json::array();
  int worst = exit_ok;
  for (const auto& f : files) {
    std::ifstream in(f);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      std::cerr << f.string() << ": " << e.what() << '\n';
      continue;
    }
    if (!j.contains("levels")) continue;  // not a scenario report
    const int code = j.value("exit_code", 0);
    worst = std::max(worst, code);
    json row{{"scenario", j.value("scenario", "")}, {"exit_code", code}};
    if (j["levels"].contains("c")) row["c"] = j["levels"]["c"];
    rows.push_back(row);
    std::string line = j.value("scenario", "?") + "  exit " + std::to_string(code);
    if (j["levels"].contains("c") && j["levels"]["c"].is_number()) line += "  c = " + fmt(j["levels"]["c"].get<double>());
    say(c, line);
  }
  json summary{{"schema_version", kReportSchemaVersion}, {"reports", rows}};
  write_atomic(fs::path(c.out.value_or(dir)) / "summary.json", summary.dump(2) + "\n");
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical-growth mountain-pass toolkit"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed = 0;
  std::string out;
  double tol = 0.0;
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
  auto* out_opt = app.add_option("--out", out, "output directory (overrides the config)");
  auto* tol_opt = app.add_option("--tol", tol, "solver tolerance (pohozaev: pass threshold)");
  app.add_flag("--quiet", common.quiet, "suppress console output");

  std::string config, extra, sweep;
  std::vector<std::string> configs;
  auto* solve = app.add_subcommand("solve", "run scenarios and write their reports (exit: worst code)");
  solve->add_option("config", configs, "scenario files")->required()->check(CLI::ExistingFile);
  auto* kappa = app.add_subcommand("kappa", "kappa(1) against kappa_+(1), kappa_-(1)");
  kappa->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
  auto* penalty = app.add_subcommand("penalty", "penalty-condition sweep");
  penalty->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
  penalty->add_option("--sweep", sweep, "parameter=v1,v2,... (amplitude, bn_fraction, lambda)");
  auto* decomp = app.add_subcommand("decompose", "profile decomposition of a CSV sequence");
  decomp->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
  decomp->add_option("sequence-dir", extra, "directory of CSV profiles")->required()->check(CLI::ExistingDirectory);
  auto* poho = app.add_subcommand("pohozaev", "Pohozaev, Nehari and gradient residuals of a profile");
  poho->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);
  poho->add_option("profile", extra, "profile CSV")->required()->check(CLI::ExistingFile);
  auto* report = app.add_subcommand("report", "summarize the reports in a directory");
  report->add_option("dir", extra, "report directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) common.seed = seed;
  if (*out_opt) common.out = out;
  if (*tol_opt) common.tol = tol;

  try {
    if (*solve) {
      int worst = exit_ok;
      for (const auto& p : configs) worst = std::max(worst, cmd_solve(p, common));
      return worst;
    }
    if (*kappa) return cmd_kappa(config, common);
    if (*penalty) return cmd_penalty(config, sweep, common);
    if (*decomp) return cmd_decompose(config, extra, common);
    if (*poho) return cmd_pohozaev(config, extra, common);
    if (*report) return cmd_report(extra, common);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const DivergenceError& e) {
    std::cerr << "no convergence: " << e.what() << '\n';
    return exit_nonconvergence;
  } catch (const NoMountainError& e) {
    std::cerr << "no convergence: " << e.what() << '\n';
    return exit_nonconvergence;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return exit_config;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_nonconvergence;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  }
  return exit_ok;
}
