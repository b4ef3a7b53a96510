#pragma once
//
// Scenario configuration: an INI-style key = value grammar (see
// docs/config_grammar.md), its typed form, and the exact inverse emitter.
//
// Sections: [scenario] [grid] [nonlinearity] [solver] [verify] [decompose]
// [penalty] [output]. Comments start with '#' or ';'. Unknown sections and keys,
// duplicate keys and malformed values are rejected with the offending line.
//

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ccmp/error.hpp"
#include "ccmp/functional.hpp"
#include "ccmp/grid.hpp"
#include "ccmp/mountain_pass.hpp"
#include "ccmp/nonlinearity.hpp"

namespace ccmp {

struct GridConfig {
  int N = 0;
  double R = 0.0;  // radial grids
  int M = 0;
  Spacing spacing = Spacing::uniform;
  double stretch = 10.0;
  DomainKind domain = DomainKind::whole_space;
  double L = 0.0;  // line grids
  double h = 0.0;

  bool operator==(const GridConfig&) const = default;
};

/// Nonlinearity keys as written, in file order. Nested terms use dotted prefixes
/// (base.kind, term1.weight, term1.kind, ...).
struct NonlinearityConfig {
  std::vector<std::pair<std::string, std::string>> entries;

  std::optional<std::string> get(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return v;
    return std::nullopt;
  }
  bool operator==(const NonlinearityConfig&) const = default;
};

struct SolverConfig {
  LevelRoute route = LevelRoute::automatic;
  double tol_g = 1e-3;
  int max_outer = 5000;
  double step = 0.5;
  double window = 0.3;
  int max_nodes = 400;
  int path_nodes = 20;
  int kappa_starts = 4;
  double kappa_tol = 1e-7;
  double kappa_stall = 1e-5;
  double kappa_width = 0.0;

  bool operator==(const SolverConfig&) const = default;
};

struct VerifyConfig {
  bool growth = true;
  bool ar = true;
  bool gradient = true;     // finite-difference check of the discrete gradient
  bool pohozaev = true;
  bool nehari = true;
  bool sharp = true;        // levels of the asymptotic problems and the c <= c_# verdicts
  bool kappa_table = false; // kappa(1) against kappa_+(1), kappa_-(1)
  bool shooting = false;    // radial shooting cross-check
  bool cross_route = false; // also run the other level route (descent vs kappa)
  double shoot_lo = 0.5;
  double shoot_hi = 20.0;
  double strict_margin = 0.04;
  double nonstrict_tol = 0.02;
  // whole-space grid for the problem at infinity of ball scenarios
  double sharp_R = 200.0;
  int sharp_M = 3000;
  double sharp_stretch = 14.0;
  // expectations checked against the report (NaN: not checked)
  double expect_c = std::numeric_limits<double>::quiet_NaN();
  double expect_tol = 1e-2;

  bool operator==(const VerifyConfig& o) const {
    auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
    return growth == o.growth && ar == o.ar && gradient == o.gradient && pohozaev == o.pohozaev && nehari == o.nehari &&
           sharp == o.sharp && kappa_table == o.kappa_table && shooting == o.shooting && cross_route == o.cross_route && shoot_lo == o.shoot_lo &&
           shoot_hi == o.shoot_hi && strict_margin == o.strict_margin && nonstrict_tol == o.nonstrict_tol &&
           sharp_R == o.sharp_R && sharp_M == o.sharp_M && sharp_stretch == o.sharp_stretch &&
           same(expect_c, o.expect_c) && expect_tol == o.expect_tol;
  }
};

/// Planted sequences u_k = w + g_k w_inf (dilations j_k = k on radial grids,
/// translations y_k = speed k - offset on line grids).
struct DecomposeConfig {
  bool enabled = false;
  int length = 16;
  double amplitude = 0.8;     // w_inf = amplitude * w
  double width = 1.0;         // width of the planted bump w
  double speed = 2.0;         // line grids
  double offset = 0.0;        // line grids
  double tol_remainder = 0.05;
  int max_profiles = 4;
  int j_min = -4;

  bool operator==(const DecomposeConfig&) const = default;
};

enum class PenaltyParameter { amplitude, bn_fraction, lambda };

inline const char* to_string(PenaltyParameter p) {
  switch (p) {
    case PenaltyParameter::amplitude: return "amplitude";
    case PenaltyParameter::bn_fraction: return "bn_fraction";
    case PenaltyParameter::lambda: return "lambda";
  }
  return "?";
}

struct PenaltyConfig {
  std::optional<PenaltyParameter> parameter;
  std::vector<double> values;

  bool operator==(const PenaltyConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  bool csv = true;

  bool operator==(const OutputConfig&) const = default;
};

struct ScenarioConfig {
  std::string name;
  Regime regime = Regime::critical_D12;
  double lambda = 0.0;
  std::optional<double> bn_fraction;  // ball: lambda = -bn_fraction * lambda_1
  double mu = 0.0;                    // Ambrosetti-Rabinowitz exponent
  std::uint64_t seed = 0;
  GridConfig grid;
  NonlinearityConfig nonlinearity;
  SolverConfig solver;
  VerifyConfig verify;
  DecomposeConfig decompose;
  PenaltyConfig penalty;
  OutputConfig output;

  bool operator==(const ScenarioConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v, const std::string& key, std::size_t line) {
  double out = 0.0;
  const char* b = v.data();
  const char* e = b + v.size();
  auto [p, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || p != e) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'", line);
  }
  if (!std::isfinite(out)) throw ConfigError("key '" + key + "': value must be finite", line);
  return out;
}

inline long long parse_int(const std::string& v, const std::string& key, std::size_t line) {
  long long out = 0;
  const char* b = v.data();
  const char* e = b + v.size();
  auto [p, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || p != e) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'", line);
  return out;
}

inline bool parse_bool(const std::string& v, const std::string& key, std::size_t line) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'", line);
}

inline std::vector<double> parse_list(const std::string& v, const std::string& key, std::size_t line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), key, line));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list", line);
  return out;
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

struct RawEntry {
  std::string value;
  std::size_t line;
};
using RawSection = std::vector<std::pair<std::string, RawEntry>>;

// Allowed nonlinearity keys relative to a prefix, given the kind found there.
inline void validate_nonlinearity(const RawSection& sec, const std::string& prefix, std::size_t section_line) {
  std::map<std::string, const RawEntry*> local;
  for (const auto& [k, e] : sec)
    if (k.rfind(prefix, 0) == 0) local[k.substr(prefix.size())] = &e;
  const auto kind_it = local.find("kind");
  if (kind_it == local.end())
    throw ConfigError("missing required key '" + prefix + "kind' in [nonlinearity]", section_line);
  const std::string kind = kind_it->second->value;
  std::set<std::string> allowed{"kind"};
  if (kind == "power") allowed.insert({"p", "coeff", "gamma"});
  else if (kind == "critical_stem" || kind == "zero") allowed.insert("gamma");
  else if (kind == "oscillating_stem") allowed.insert({"eps", "gamma"});
  else if (kind == "modulation") allowed.insert({"amplitude", "width"});
  else if (kind != "sum")
    throw ConfigError("unknown nonlinearity kind '" + kind + "'", kind_it->second->line);

  std::set<std::string> nested;
  for (const auto& [k, e] : local) {
    const auto dot = k.find('.');
    if (dot == std::string::npos) {
      if (!allowed.count(k)) throw ConfigError("unknown key '" + prefix + k + "' for kind " + kind, e->line);
      if (k != "kind") parse_double(e->value, prefix + k, e->line);
      continue;
    }
    const std::string head = k.substr(0, dot);
    const bool ok = (kind == "modulation" && head == "base") ||
                    (kind == "sum" && head.size() > 4 && head.rfind("term", 0) == 0 &&
                     head.find_first_not_of("0123456789", 4) == std::string::npos);
    if (!ok) throw ConfigError("unknown key '" + prefix + k + "' for kind " + kind, e->line);
    nested.insert(head);
  }
  if (kind == "power" && !local.count("p")) throw ConfigError("missing required key '" + prefix + "p'", kind_it->second->line);
  if (kind == "oscillating_stem" && !local.count("eps"))
    throw ConfigError("missing required key '" + prefix + "eps'", kind_it->second->line);
  if (kind == "modulation") {
    if (!local.count("amplitude")) throw ConfigError("missing required key '" + prefix + "amplitude'", kind_it->second->line);
    if (!nested.count("base")) throw ConfigError("missing required key '" + prefix + "base.kind'", kind_it->second->line);
  }
  if (kind == "sum" && nested.empty()) throw ConfigError("sum needs at least one term", kind_it->second->line);
  for (const auto& head : nested) {
    if (kind == "sum") {
      const auto w = local.find(head + ".weight");
      if (w == local.end()) throw ConfigError("missing required key '" + prefix + head + ".weight'", kind_it->second->line);
      parse_double(w->second->value, prefix + head + ".weight", w->second->line);
      // the term's own keys, with weight stripped
      RawSection sub;
      for (const auto& [k, e] : sec)
        if (k != prefix + head + ".weight") sub.emplace_back(k, e);
      validate_nonlinearity(sub, prefix + head + ".", kind_it->second->line);
    } else {
      validate_nonlinearity(sec, prefix + head + ".", kind_it->second->line);
    }
  }
}

inline NonlinearitySpec build_nonlinearity(const NonlinearityConfig& nc, const std::string& prefix, int N) {
  auto need = [&](const std::string& k) { return std::stod(*nc.get(prefix + k)); };
  auto opt = [&](const std::string& k) -> std::optional<double> {
    if (auto v = nc.get(prefix + k)) return std::stod(*v);
    return std::nullopt;
  };
  const std::string kind = *nc.get(prefix + "kind");
  const double gamma = opt("gamma").value_or(2.0);
  if (kind == "power") return NonlinearitySpec::power(N, need("p"), opt("coeff"), gamma);
  if (kind == "critical_stem") return NonlinearitySpec::critical_stem(N, gamma);
  if (kind == "oscillating_stem") return NonlinearitySpec::oscillating_stem(N, need("eps"), gamma);
  if (kind == "zero") return NonlinearitySpec::zero(N, gamma);
  if (kind == "modulation")
    return NonlinearitySpec::spatial_modulation(build_nonlinearity(nc, prefix + "base.", N),
                                                Envelope{need("amplitude"), opt("width").value_or(1.0)});
  // sum: terms in order of first appearance
  std::vector<std::string> heads;
  for (const auto& [k, v] : nc.entries) {
    if (k.rfind(prefix + "term", 0) != 0) continue;
    const auto rest = k.substr(prefix.size());
    const auto head = rest.substr(0, rest.find('.'));
    if (std::find(heads.begin(), heads.end(), head) == heads.end()) heads.push_back(head);
  }
  std::vector<WeightedTerm> terms;
  for (const auto& head : heads)
    terms.push_back({std::stod(*nc.get(prefix + head + ".weight")), build_nonlinearity(nc, prefix + head + ".", N)});
  return NonlinearitySpec::sum(std::move(terms));
}

}  // namespace detail

/// Parses the scenario grammar. Throws ConfigError carrying the line number.
inline ScenarioConfig parse_config(const std::string& text) {
  static const std::set<std::string> sections{"scenario", "grid",    "nonlinearity", "solver",
                                              "verify",   "decompose", "penalty",    "output"};
  std::map<std::string, detail::RawSection> raw;
  std::map<std::string, std::size_t> section_line;
  std::string current;
  std::istringstream in(text);
  std::string lineText;
  std::size_t ln = 0;
  while (std::getline(in, lineText)) {
    ++ln;
    const std::string t = detail::trim(lineText);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("malformed section header", ln);
      current = detail::trim(t.substr(1, t.size() - 2));
      if (!sections.count(current)) throw ConfigError("unknown section [" + current + "]", ln);
      if (section_line.count(current)) throw ConfigError("duplicate section [" + current + "]", ln);
      section_line[current] = ln;
      raw[current];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", ln);
    if (current.empty()) throw ConfigError("key outside of any section", ln);
    const std::string key = detail::trim(t.substr(0, eq));
    std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", ln);
    if (const auto hash = value.find(" #"); hash != std::string::npos) value = detail::trim(value.substr(0, hash));
    for (const auto& [k, e] : raw[current])
      if (k == key) throw ConfigError("duplicate key '" + key + "' in [" + current + "]", ln);
    raw[current].emplace_back(key, detail::RawEntry{value, ln});
  }

  ScenarioConfig cfg;
  // generic typed reader over one section, rejecting keys nobody consumed
  struct Reader {
    const detail::RawSection* sec;
    std::string name;
    std::size_t header_line;
    std::set<std::string> used;

    const detail::RawEntry* find(const std::string& k) {
      if (!sec) return nullptr;
      for (const auto& [key, e] : *sec)
        if (key == k) {
          used.insert(k);
          return &e;
        }
      return nullptr;
    }
    const detail::RawEntry& require(const std::string& k) {
      if (auto e = find(k)) return *e;
      throw ConfigError("missing required key '" + k + "' in [" + name + "]", header_line);
    }
    void num(const std::string& k, double& out) {
      if (auto e = find(k)) out = detail::parse_double(e->value, k, e->line);
    }
    void integer(const std::string& k, int& out) {
      if (auto e = find(k)) out = static_cast<int>(detail::parse_int(e->value, k, e->line));
    }
    void flag(const std::string& k, bool& out) {
      if (auto e = find(k)) out = detail::parse_bool(e->value, k, e->line);
    }
    void finish() {
      if (!sec) return;
      for (const auto& [k, e] : *sec)
        if (!used.count(k)) throw ConfigError("unknown key '" + k + "' in [" + name + "]", e.line);
    }
  };
  auto reader = [&](const std::string& s) {
    auto it = raw.find(s);
    return Reader{it == raw.end() ? nullptr : &it->second, s, section_line.count(s) ? section_line[s] : 0, {}};
  };

  for (const char* required : {"scenario", "grid", "nonlinearity"})
    if (!raw.count(required)) throw ConfigError(std::string("missing required section [") + required + "]");

  {
    auto r = reader("scenario");
    cfg.name = r.require("name").value;
    const auto& reg = r.require("regime");
    if (reg.value == "critical_D12") cfg.regime = Regime::critical_D12;
    else if (reg.value == "subcritical_H1") cfg.regime = Regime::subcritical_H1;
    else if (reg.value == "ball_domain") cfg.regime = Regime::ball_domain;
    else throw ConfigError("unknown regime '" + reg.value + "'", reg.line);
    r.num("lambda", cfg.lambda);
    if (auto e = r.find("bn_fraction")) cfg.bn_fraction = detail::parse_double(e->value, "bn_fraction", e->line);
    const auto& mu = r.require("mu");
    cfg.mu = detail::parse_double(mu.value, "mu", mu.line);
    if (!(cfg.mu > 2.0)) throw ConfigError("mu must exceed 2", mu.line);
    if (auto e = r.find("seed")) {
      const auto v = detail::parse_int(e->value, "seed", e->line);
      if (v < 0) throw ConfigError("seed must be nonnegative", e->line);
      cfg.seed = static_cast<std::uint64_t>(v);
    }
    r.finish();
    const std::size_t at = section_line["scenario"];
    const auto* lam_entry = r.find("lambda");
    const std::size_t lam_at = lam_entry ? lam_entry->line : at;
    if (cfg.regime == Regime::critical_D12 && cfg.lambda != 0.0)
      throw ConfigError("critical_D12 is the zero mass case: lambda must be 0", lam_at);
    if (cfg.regime == Regime::subcritical_H1 && !(cfg.lambda > 0.0))
      throw ConfigError("subcritical_H1 requires lambda > 0", lam_at);
    if (cfg.bn_fraction && cfg.regime != Regime::ball_domain)
      throw ConfigError("bn_fraction applies to ball_domain only", at);
    if (cfg.bn_fraction && cfg.lambda != 0.0) throw ConfigError("give either lambda or bn_fraction, not both", at);
    if (cfg.bn_fraction && !(*cfg.bn_fraction >= 0.0 && *cfg.bn_fraction < 1.0))
      throw ConfigError("bn_fraction must lie in [0, 1)", at);
  }
  {
    auto r = reader("grid");
    const auto& n = r.require("N");
    cfg.grid.N = static_cast<int>(detail::parse_int(n.value, "N", n.line));
    if (cfg.grid.N == 1) {
      const auto& L = r.require("L");
      cfg.grid.L = detail::parse_double(L.value, "L", L.line);
      const auto& h = r.require("h");
      cfg.grid.h = detail::parse_double(h.value, "h", h.line);
      cfg.grid.domain = DomainKind::line;
      if (!(cfg.grid.L > 0.0 && cfg.grid.h > 0.0)) throw ConfigError("L and h must be positive", n.line);
    } else if (cfg.grid.N >= 3) {
      const auto& R = r.require("R");
      cfg.grid.R = detail::parse_double(R.value, "R", R.line);
      const auto& M = r.require("M");
      cfg.grid.M = static_cast<int>(detail::parse_int(M.value, "M", M.line));
      if (auto e = r.find("spacing")) {
        if (e->value == "uniform") cfg.grid.spacing = Spacing::uniform;
        else if (e->value == "geometric") cfg.grid.spacing = Spacing::geometric;
        else throw ConfigError("spacing must be uniform or geometric", e->line);
      }
      r.num("stretch", cfg.grid.stretch);
      if (auto e = r.find("domain")) {
        if (e->value == "whole_space") cfg.grid.domain = DomainKind::whole_space;
        else if (e->value == "ball") cfg.grid.domain = DomainKind::ball;
        else throw ConfigError("domain must be whole_space or ball", e->line);
      }
      if (!(cfg.grid.R > 0.0) || cfg.grid.M < 64) throw ConfigError("need R > 0 and M >= 64", n.line);
    } else {
      throw ConfigError("N must be 1 or at least 3", n.line);
    }
    r.finish();
    const bool ball = cfg.grid.domain == DomainKind::ball;
    if ((cfg.regime == Regime::ball_domain) != ball)
      throw ConfigError("ball_domain regime and domain = ball go together", section_line["grid"]);
    if (cfg.regime == Regime::critical_D12 && cfg.grid.N == 1)
      throw ConfigError("critical_D12 needs N >= 3", section_line["grid"]);
  }
  {
    const auto& sec = raw["nonlinearity"];
    detail::validate_nonlinearity(sec, "", section_line["nonlinearity"]);
    for (const auto& [k, e] : sec) cfg.nonlinearity.entries.emplace_back(k, e.value);
  }
  {
    auto r = reader("solver");
    if (auto e = r.find("route")) {
      if (e->value == "automatic") cfg.solver.route = LevelRoute::automatic;
      else if (e->value == "kappa") cfg.solver.route = LevelRoute::kappa;
      else if (e->value == "descent") cfg.solver.route = LevelRoute::descent;
      else throw ConfigError("route must be automatic, kappa or descent", e->line);
    }
    r.num("tol_g", cfg.solver.tol_g);
    r.integer("max_outer", cfg.solver.max_outer);
    r.num("step", cfg.solver.step);
    r.num("window", cfg.solver.window);
    r.integer("max_nodes", cfg.solver.max_nodes);
    r.integer("path_nodes", cfg.solver.path_nodes);
    r.integer("kappa_starts", cfg.solver.kappa_starts);
    r.num("kappa_tol", cfg.solver.kappa_tol);
    r.num("kappa_stall", cfg.solver.kappa_stall);
    r.num("kappa_width", cfg.solver.kappa_width);
    r.finish();
    if (!(cfg.solver.tol_g > 0.0) || cfg.solver.max_outer < 1 || cfg.solver.path_nodes < 2 || cfg.solver.kappa_starts < 1)
      throw ConfigError("solver options out of range", section_line["solver"]);
  }
  {
    auto r = reader("verify");
    auto& v = cfg.verify;
    r.flag("growth", v.growth);
    r.flag("ar", v.ar);
    r.flag("gradient", v.gradient);
    r.flag("pohozaev", v.pohozaev);
    r.flag("nehari", v.nehari);
    r.flag("sharp", v.sharp);
    r.flag("kappa_table", v.kappa_table);
    r.flag("shooting", v.shooting);
    r.flag("cross_route", v.cross_route);
    r.num("shoot_lo", v.shoot_lo);
    r.num("shoot_hi", v.shoot_hi);
    r.num("strict_margin", v.strict_margin);
    r.num("nonstrict_tol", v.nonstrict_tol);
    r.num("sharp_R", v.sharp_R);
    r.integer("sharp_M", v.sharp_M);
    r.num("sharp_stretch", v.sharp_stretch);
    r.num("expect_c", v.expect_c);
    r.num("expect_tol", v.expect_tol);
    r.finish();
  }
  {
    auto r = reader("decompose");
    auto& d = cfg.decompose;
    r.flag("enabled", d.enabled);
    r.integer("length", d.length);
    r.num("amplitude", d.amplitude);
    r.num("width", d.width);
    r.num("speed", d.speed);
    r.num("offset", d.offset);
    r.num("tol_remainder", d.tol_remainder);
    r.integer("max_profiles", d.max_profiles);
    r.integer("j_min", d.j_min);
    r.finish();
    if (d.length < 8) throw ConfigError("decompose length must be at least 8", section_line["decompose"]);
  }
  {
    auto r = reader("penalty");
    if (auto e = r.find("parameter")) {
      if (e->value == "amplitude") cfg.penalty.parameter = PenaltyParameter::amplitude;
      else if (e->value == "bn_fraction") cfg.penalty.parameter = PenaltyParameter::bn_fraction;
      else if (e->value == "lambda") cfg.penalty.parameter = PenaltyParameter::lambda;
      else throw ConfigError("parameter must be amplitude, bn_fraction or lambda", e->line);
    }
    if (auto e = r.find("values")) cfg.penalty.values = detail::parse_list(e->value, "values", e->line);
    r.finish();
    if (cfg.penalty.parameter.has_value() != !cfg.penalty.values.empty())
      throw ConfigError("penalty needs both parameter and values", section_line["penalty"]);
  }
  {
    auto r = reader("output");
    if (auto e = r.find("dir")) cfg.output.dir = e->value;
    r.flag("csv", cfg.output.csv);
    r.finish();
  }
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Canonical text form; parse_config(emit_config(c)) == c.
inline std::string emit_config(const ScenarioConfig& c) {
  using detail::fmt;
  std::ostringstream os;
  auto b = [](bool v) { return v ? "true" : "false"; };
  os << "[scenario]\nname = " << c.name << "\nregime = " << to_string(c.regime) << "\nlambda = " << fmt(c.lambda) << "\n";
  if (c.bn_fraction) os << "bn_fraction = " << fmt(*c.bn_fraction) << "\n";
  os << "mu = " << fmt(c.mu) << "\nseed = " << c.seed << "\n\n[grid]\nN = " << c.grid.N << "\n";
  if (c.grid.N == 1) {
    os << "L = " << fmt(c.grid.L) << "\nh = " << fmt(c.grid.h) << "\n";
  } else {
    os << "R = " << fmt(c.grid.R) << "\nM = " << c.grid.M << "\nspacing = " << to_string(c.grid.spacing)
       << "\nstretch = " << fmt(c.grid.stretch) << "\ndomain = " << to_string(c.grid.domain) << "\n";
  }
  os << "\n[nonlinearity]\n";
  for (const auto& [k, v] : c.nonlinearity.entries) os << k << " = " << v << "\n";
  const auto& s = c.solver;
  const char* route = s.route == LevelRoute::automatic ? "automatic" : s.route == LevelRoute::kappa ? "kappa" : "descent";
  os << "\n[solver]\nroute = " << route << "\ntol_g = " << fmt(s.tol_g) << "\nmax_outer = " << s.max_outer
     << "\nstep = " << fmt(s.step) << "\nwindow = " << fmt(s.window) << "\nmax_nodes = " << s.max_nodes
     << "\npath_nodes = " << s.path_nodes << "\nkappa_starts = " << s.kappa_starts << "\nkappa_tol = " << fmt(s.kappa_tol)
     << "\nkappa_stall = " << fmt(s.kappa_stall) << "\nkappa_width = " << fmt(s.kappa_width) << "\n";
  const auto& v = c.verify;
  os << "\n[verify]\ngrowth = " << b(v.growth) << "\nar = " << b(v.ar) << "\ngradient = " << b(v.gradient)
     << "\npohozaev = " << b(v.pohozaev) << "\nnehari = " << b(v.nehari) << "\nsharp = " << b(v.sharp)
     << "\nkappa_table = " << b(v.kappa_table) << "\nshooting = " << b(v.shooting) << "\ncross_route = " << b(v.cross_route) << "\nshoot_lo = " << fmt(v.shoot_lo)
     << "\nshoot_hi = " << fmt(v.shoot_hi) << "\nstrict_margin = " << fmt(v.strict_margin)
     << "\nnonstrict_tol = " << fmt(v.nonstrict_tol) << "\nsharp_R = " << fmt(v.sharp_R) << "\nsharp_M = " << v.sharp_M
     << "\nsharp_stretch = " << fmt(v.sharp_stretch) << "\n";
  if (!std::isnan(v.expect_c)) os << "expect_c = " << fmt(v.expect_c) << "\n";
  os << "expect_tol = " << fmt(v.expect_tol) << "\n";
  const auto& d = c.decompose;
  os << "\n[decompose]\nenabled = " << b(d.enabled) << "\nlength = " << d.length << "\namplitude = " << fmt(d.amplitude)
     << "\nwidth = " << fmt(d.width) << "\nspeed = " << fmt(d.speed) << "\noffset = " << fmt(d.offset)
     << "\ntol_remainder = " << fmt(d.tol_remainder) << "\nmax_profiles = " << d.max_profiles << "\nj_min = " << d.j_min
     << "\n";
  if (c.penalty.parameter) {
    os << "\n[penalty]\nparameter = " << to_string(*c.penalty.parameter) << "\nvalues = ";
    for (std::size_t i = 0; i < c.penalty.values.size(); ++i) os << (i ? ", " : "") << fmt(c.penalty.values[i]);
    os << "\n";
  }
  os << "\n[output]\ndir = " << c.output.dir << "\ncsv = " << b(c.output.csv) << "\n";
  return os.str();
}

/// The nonlinearity of a scenario (dimension from [grid]).
inline NonlinearitySpec build_nonlinearity(const ScenarioConfig& c) {
  return detail::build_nonlinearity(c.nonlinearity, "", c.grid.N);
}

inline GridPtr build_grid(const ScenarioConfig& c) {
  if (c.grid.N == 1) return Grid::line(c.grid.L, c.grid.h);
  return Grid::radial(c.grid.N, c.grid.R, c.grid.M, c.grid.spacing, c.grid.domain, c.grid.stretch);
}

}  // namespace ccmp
