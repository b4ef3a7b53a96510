// Acceptance run over the shipped scenarios: one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>

#include "../unit/oracles.hpp"
#include "ccmp/scenario.hpp"

using namespace ccmp;

namespace {

struct Run {
  ScenarioConfig cfg;
  ScenarioReport rep;
  double seconds = 0.0;
};

std::filesystem::path g_dir;
std::map<std::string, Run> g_runs;

const Run& run(const std::string& name) {
  auto it = g_runs.find(name);
  if (it != g_runs.end()) return it->second;
  Run r;
  r.cfg = load_config((g_dir / (name + ".cfg")).string());
  const auto t0 = std::chrono::steady_clock::now();
  r.rep = run_scenario(r.cfg);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return g_runs.emplace(name, std::move(r)).first->second;
}

int g_failed = 0;

void verdict(int id, bool ok, const std::string& detail) {
  std::printf("AC%d %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failed;
}

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// min over integer shifts of the relative L2 distance to sqrt(2) sech
double soliton_distance(const DiscreteFunction& u) {
  const auto& g = *u.grid();
  double best = INFINITY;
  for (int s = -400; s <= 400; ++s) {
    const double y = s * g.h();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double ref = oracle::soliton(g.node(i) - y);
      num += g.mass()[i] * std::pow(std::abs(u[i]) - ref, 2);
      den += g.mass()[i] * ref * ref;
    }
    best = std::min(best, std::sqrt(num / den));
  }
  return best;
}

void ac1() {
  const auto& r = run("S1_soliton");
  const auto& lv = *r.rep.level;
  const double dist = soliton_distance(*lv.candidate);
  const bool ok = r.rep.errors.empty() && std::abs(lv.c - oracle::soliton_level) <= 1e-2 && dist <= 2e-2 &&
                  r.seconds < 60.0 && r.cfg.grid.h <= 0.01;
  verdict(1, ok, fmt("soliton: c = %.6f (4/3), L2 distance %.2e, %.1f s", lv.c, dist, r.seconds));
}

void ac2() {
  const auto& r = run("S2_cubic_3d");
  bool ok = r.rep.errors.empty() && r.rep.shooting && r.rep.shooting_pohozaev && r.rep.level;
  double gap = NAN, poh = NAN;
  if (ok) {
    gap = rel(r.rep.level->c, r.rep.shooting->level);
    poh = r.rep.shooting_pohozaev->relative;
    ok = gap <= 2e-2 && poh <= 1e-2 && r.seconds < 120.0 && r.rep.level->route == "descent";
  }
  verdict(2, ok, fmt("cubic N=3: descent vs shooting gap %.2e, shooting Pohozaev %.2e, %.1f s", gap, poh, r.seconds));
}

void ac3() {
  const auto cfg = load_config((g_dir / "S3_stem_sobolev.cfg").string());
  const auto grid = build_grid(cfg);
  const auto F = build_nonlinearity(cfg);
  const auto opts = detail::level_options(cfg).kappa;
  const auto k = kappa_one(F, grid, opts);
  const double ref = oracle::sobolev_kappa(cfg.grid.N);
  const double formula = kappa(k, 4.0) / k.kappa1;
  const double exact = std::pow(4.0, 0.5 * oracle::crit(cfg.grid.N));
  const double remax = kappa_remaximized(F, grid, 4.0, opts) / k.kappa1;
  const bool ok = rel(k.kappa1, ref) <= 1.5e-2 && formula == exact && rel(remax, exact) <= 2e-2;
  verdict(3, ok, fmt("kappa(1) = %.7f vs quadrature %.7f (%.2e); kappa(4)/kappa(1) formula %.6g, re-max %.6f",
                     k.kappa1, ref, rel(k.kappa1, ref), formula, remax));
}

void ac4() {
  const auto& r = run("S4_oscillating_stem");
  bool ok = r.rep.errors.empty() && r.rep.level && r.rep.level->candidate && r.rep.cross_level;
  double t_star = NAN, gap = NAN, k_osc = NAN, k_stem = NAN;
  if (ok) {
    const auto& w = *r.rep.level->candidate;
    EnergyFunctional G(w.grid(), 0.0, build_nonlinearity(r.cfg), Regime::critical_D12);
    t_star = path_max(G, w).t_star;
    gap = rel(r.rep.level->c, r.rep.cross_level->c);
    const auto opts = detail::level_options(r.cfg).kappa;
    k_osc = kappa_one(build_nonlinearity(r.cfg), w.grid(), opts).kappa1;
    k_stem = kappa_one(NonlinearitySpec::critical_stem(r.cfg.grid.N), w.grid(), opts).kappa1;
    ok = r.rep.level->route == "kappa" && r.rep.cross_level->route == "descent" && std::abs(t_star - 1.0) <= 1e-2 &&
         gap <= 2e-2 && k_osc >= k_stem * (1.0 - 2e-2);
  }
  verdict(4, ok, fmt("oscillating stem: t* = %.5f, kappa vs descent level gap %.2e, kappa(1) %.6f vs stem %.6f", t_star,
                     gap, k_osc, k_stem));
}

void ac5() {
  const auto& r = run("S5_ball_threshold");
  bool ok = r.rep.errors.empty() && r.rep.penalty && r.rep.penalty->rows.size() == 3;
  std::string detail;
  if (ok) {
    const double c_plus_oracle = 1.0 / (16.0 * oracle::sobolev_kappa(4));
    for (const auto& row : r.rep.penalty->rows) {
      const double margin = (row.c_sharp - row.c) / row.c_sharp;
      if (row.value == 0.0) ok = ok && std::abs(margin) <= 2e-2;
      else ok = ok && row.strict && margin > 4e-2;
      ok = ok && rel(row.c_sharp, c_plus_oracle) <= 1.5e-2;
      detail += fmt("[%.1f lambda_1: c = %.5f, margin %.2f%%] ", row.value, row.c, 100.0 * margin);
    }
    detail += fmt("c_plus = %.5f (closed form %.5f)", r.rep.penalty->rows.front().c_sharp, c_plus_oracle);
  }
  verdict(5, ok, "ball N=4: " + detail);
}

void ac6() {
  const auto& r = run("S6_planted_multibump");
  bool ok = r.rep.errors.empty() && r.rep.decomposition.has_value();
  std::string detail;
  if (ok) {
    const auto& d = *r.rep.decomposition;
    ok = d.profiles.size() == 2 && d.profiles[0].cls == "N0" && d.profiles[1].cls == "Nplus";
    for (const auto& p : d.profiles) {
      ok = ok && p.recovery_error <= 5e-2;
      detail += fmt("%s err %.2f%%, ", p.cls.c_str(), 100.0 * p.recovery_error);
    }
    ok = ok && std::abs(d.norm_ratio - 1.0) <= 3e-2 && d.final_remainder <= 5e-2 && d.split_gap <= 5e-2;
    detail += fmt("norm ledger %.4f, remainder %.2e, split gap %.2e", d.norm_ratio, d.final_remainder, d.split_gap);
  }
  verdict(6, ok, "planted two-profile: " + detail);
}

void ac7() {
  const auto& r = run("S7_modulation_penalty");
  bool ok = r.rep.errors.empty() && r.rep.penalty && r.rep.penalty->rows.size() >= 2;
  std::string detail;
  if (ok) {
    const auto& rows = r.rep.penalty->rows;
    for (std::size_t i = 1; i < rows.size(); ++i) ok = ok && rows[i].c < rows[i - 1].c && rows[i].value > rows[i - 1].value;
    for (const auto& row : rows) {
      if (row.value == 0.0) ok = ok && std::abs(row.c - row.c_sharp) <= 1e-2 && std::abs(row.c - oracle::soliton_level) <= 1e-2;
      if (row.value >= 0.5) ok = ok && row.strict;
      detail += fmt("[a = %.1f: c = %.5f%s] ", row.value, row.c, row.strict ? " strict" : "");
    }
  }
  verdict(7, ok, "modulation sweep: " + detail);
}

// Property suites on every shipped scenario.
void ac8() {
  bool ok = true;
  std::string bad;
  double worst_fd = 0.0, worst_scale = 0.0;
  std::size_t count = 0;
  for (const auto& e : std::filesystem::directory_iterator(g_dir)) {
    if (e.path().extension() != ".cfg") continue;
    const auto name = e.path().stem().string();
    const auto& r = run(name);
    ++count;
    auto fail = [&](const std::string& what) {
      ok = false;
      bad += " " + name + ":" + what;
    };
    if (!r.rep.errors.empty()) fail("errors");
    // gradient against central differences
    if (!r.rep.gradient_fd_error || !(*r.rep.gradient_fd_error < 1e-6)) fail("fd");
    else worst_fd = std::max(worst_fd, *r.rep.gradient_fd_error);
    // c <= c_# unconditionally
    for (const auto& s : r.rep.sharp)
      if (!(r.rep.level->c <= s.c * 1.02)) fail("c>c_#");
    if (r.rep.penalty)
      for (const auto& row : r.rep.penalty->rows)
        if (!(row.c <= row.c_sharp * 1.02)) fail("penalty c>c_#");
    // dilation scaling on the scenario's candidate; balls only shrink
    const auto& u = *r.rep.level->candidate;
    const int N = r.cfg.grid.N;
    auto F = build_nonlinearity(r.cfg);
    if (!F.autonomous()) F = *asymptotic_family(F, detail::sample_box_for(F)).F0.F;
    for (double t : u.grid()->domain() == DomainKind::ball ? std::vector<double>{0.5, 0.8} : std::vector<double>{0.8, 1.25}) {
      const auto v = dilate(u, t);
      const double en = dirichlet_seminorm_sq(v) / dirichlet_seminorm_sq(u) / std::pow(t, N - 2);
      const double ep = composite_integral(v, F) / composite_integral(u, F) / std::pow(t, N);
      worst_scale = std::max({worst_scale, std::abs(en - 1.0), std::abs(ep - 1.0)});
      if (std::abs(en - 1.0) > 1e-2 || std::abs(ep - 1.0) > 1e-2) fail("scaling");
    }
    if (!r.rep.ar_pass || !*r.rep.ar_pass) fail("AR");
    // determinism: a second run with the same seed
    auto a = report_json(r.rep), b = report_json(run_scenario(r.cfg));
    a.erase("timing");
    b.erase("timing");
    if (a.dump() != b.dump()) fail("nondeterministic");
  }
  ok = ok && count == 7;
  verdict(8, ok, fmt("%zu scenarios: worst fd %.1e, worst scaling %.1e; AR, c <= c_#, determinism%s", count, worst_fd,
                     worst_scale, bad.empty() ? " ok" : (" failed:" + bad).c_str()));
}

}  // namespace

int main(int argc, char** argv) {
  g_dir = argc > 1 ? std::filesystem::path(argv[1]) : std::filesystem::path(CCMP_SOURCE_DIR) / "scenarios";
  int id = 0;
  for (auto* f : {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8}) {
    ++id;
    try {
      f();
    } catch (const std::exception& e) {
      verdict(id, false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d of 8 criteria failed\n", g_failed);
  return g_failed;
}
