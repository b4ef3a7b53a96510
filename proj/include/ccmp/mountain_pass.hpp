#pragma once
//
// Mountain-pass levels by path deformation, an ODE shooting oracle for radial
// ground states, and the level comparison against the asymptotic problems.
//

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>

#include "ccmp/error.hpp"
#include "ccmp/function_space.hpp"
#include "ccmp/functional.hpp"
#include "ccmp/interpolation.hpp"
#include "ccmp/sphere_maximizer.hpp"

namespace ccmp {

/// Polyline phi_0 = 0, ..., phi_K with energy(phi_K) < 0; params are increasing.
struct PathPolyline {
  std::vector<DiscreteFunction> nodes;
  std::vector<double> params;

  std::size_t size() const { return nodes.size(); }
};

/// Dilation path seed(. / t) for autonomous problems in the critical regime,
/// otherwise the ray tau * seed; the endpoint is pushed out until its energy is negative.
inline PathPolyline initial_path(const EnergyFunctional& G, const DiscreteFunction& seed, int K = 20) {
  if (K < 16) throw InvalidArgument("initial_path: at least 16 segments required");
  seed.check_same_grid(DiscreteFunction::zeros(G.grid()));
  const bool dilation = G.regime() == Regime::critical_D12 && G.spec().autonomous();
  PathPolyline path;
  if (dilation) {
    const double a = dirichlet_seminorm_sq(seed), b = G.psi(seed);
    if (!(b > 0.0)) throw NoMountainError("initial_path: psi(seed) <= 0, no mountain-pass geometry along dilations");
    double T = 1.5 * std::sqrt(a / (2.0 * b));
    for (int tries = 0; tries < 20 && energy(G, dilate(seed, T)) >= 0.0; ++tries) T *= 1.5;
    if (energy(G, dilate(seed, T)) >= 0.0) throw NoMountainError("initial_path: dilation endpoint never reached negative energy");
    for (int k = 0; k <= K; ++k) {
      const double t = T * k / K;
      path.nodes.push_back(k == 0 ? DiscreteFunction::zeros(G.grid()) : dilate(seed, t));
      path.params.push_back(t);
    }
    return path;
  }
  double tau = 1.0;
  int doublings = 0;
  while (energy(G, seed * tau) >= 0.0) {
    if (++doublings > 60) throw NoMountainError("initial_path: energy along the ray never becomes negative");
    tau *= 2.0;
  }
  for (int k = 0; k <= K; ++k) {
    path.nodes.push_back(seed * (tau * k / K));
    path.params.push_back(tau * k / K);
  }
  return path;
}

struct DescentOptions {
  double tol_g = 1e-3;     // stop when |G'(candidate)|_* < tol_g |candidate|
  int max_outer = 5000;
  double step = 0.5;       // initial step along the Riesz representer (Armijo backtracking)
  double window = 0.3;     // deform nodes with energy in the top `window` fraction of [0, max]
  std::size_t max_nodes = 400;
  double spacing = 0.1;    // re-insert midpoints where |phi_{i+1} - phi_i| > spacing |candidate|
};

struct DescentResult {
  double c_est = 0.0;
  DiscreteFunction candidate;
  double grad_norm = 0.0;  // relative dual norm at the candidate
  int iters = 0;
  bool converged = false;
  bool diverged = false;   // max energy rose across 10 consecutive outer steps
  std::vector<double> history;
  std::size_t path_nodes = 0;
};

namespace detail {

inline double b_norm_sq(const EnergyFunctional& G, const DiscreteFunction& u) { return G.norm_sq(u); }

// Maximizes the energy on the segment a -> b by golden section; returns (s, value).
inline std::pair<double, double> segment_max(const EnergyFunctional& G, const DiscreteFunction& a,
                                             const DiscreteFunction& b) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = 1.0;
  auto at = [&](double s) { return energy(G, a.combine(1.0 - s, b, s)); };
  double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
  double e1 = at(c1), e2 = at(c2);
  for (int it = 0; it < 40; ++it) {
    if (e1 > e2) {
      hi = c2;
      c2 = c1;
      e2 = e1;
      c1 = hi - gr * (hi - lo);
      e1 = at(c1);
    } else {
      lo = c1;
      c1 = c2;
      e1 = e2;
      c2 = lo + gr * (hi - lo);
      e2 = at(c2);
    }
  }
  const double s = 0.5 * (lo + hi);
  return {s, at(s)};
}

}  // namespace detail

/// Deforms the path downhill around its maximum (the energy window moves along
/// -step * Riesz(G'), with Armijo backtracking) until the maximum node is critical.
inline DescentResult mp_level_descent(const EnergyFunctional& G, PathPolyline path, const DescentOptions& o = {}) {
  if (path.size() < 3) throw InvalidArgument("mp_level_descent: path too short");
  if (energy(G, path.nodes.back()) >= 0.0) throw InvalidArgument("mp_level_descent: path endpoint energy must be negative");
  const auto& grid = *G.grid();
  std::vector<double> en(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) en[i] = energy(G, path.nodes[i]);

  DescentResult res{0.0, DiscreteFunction::zeros(G.grid()), 0.0, 0, false, false, {}};
  double prev_max = std::numeric_limits<double>::infinity();
  int rises = 0;
  for (int it = 0; it < o.max_outer; ++it) {
    res.iters = it + 1;
    res.path_nodes = path.size();
    std::size_t k = static_cast<std::size_t>(std::max_element(en.begin() + 1, en.end() - 1) - en.begin());
    // a segment may straddle a higher ridge than either of its nodes
    for (std::size_t i = 0; i + 1 < path.size() && path.size() < o.max_nodes; ++i) {
      auto mid = path.nodes[i].combine(0.5, path.nodes[i + 1], 0.5);
      const double em = energy(G, mid);
      if (em > en[k]) {
        path.nodes.insert(path.nodes.begin() + static_cast<long>(i + 1), std::move(mid));
        path.params.insert(path.params.begin() + static_cast<long>(i + 1), 0.5 * (path.params[i] + path.params[i + 1]));
        en.insert(en.begin() + static_cast<long>(i + 1), em);
        k = i + 1;
        ++i;
      }
    }
    k = static_cast<std::size_t>(std::max_element(en.begin() + 1, en.end() - 1) - en.begin());
    // refine the maximum on the adjacent segments
    double best = en[k];
    std::optional<std::pair<std::size_t, DiscreteFunction>> ins;
    for (int side = -1; side <= 0; ++side) {
      const long a = static_cast<long>(k) + side, b = a + 1;
      if (a < 0 || b >= static_cast<long>(path.size())) continue;
      auto [s, e] = detail::segment_max(G, path.nodes[a], path.nodes[b]);
      if (e > best + 1e-14 * std::max(1.0, std::abs(best)) && s > 1e-3 && s < 1.0 - 1e-3) {
        best = e;
        ins.emplace(static_cast<std::size_t>(b), path.nodes[a].combine(1.0 - s, path.nodes[b], s));
      }
    }
    if (ins && path.size() < o.max_nodes) {
      const std::size_t b = ins->first;
      const double tp = 0.5 * (path.params[b - 1] + path.params[b]);
      path.nodes.insert(path.nodes.begin() + static_cast<long>(b), std::move(ins->second));
      path.params.insert(path.params.begin() + static_cast<long>(b), tp);
      en.insert(en.begin() + static_cast<long>(b), best);
      k = b;
    }
    const double emax = en[k];
    res.history.push_back(emax);
    rises = emax > prev_max + 1e-10 * std::max(1.0, std::abs(prev_max)) ? rises + 1 : 0;
    prev_max = emax;
    if (rises >= 10) {
      res.diverged = true;
      res.c_est = emax;
      res.candidate = path.nodes[k];
      return res;
    }

    const auto gr = gradient_residual(G, path.nodes[k]);
    const double nu = std::sqrt(std::max(detail::b_norm_sq(G, path.nodes[k]), 1e-300));
    res.c_est = emax;
    res.candidate = path.nodes[k];
    res.grad_norm = gr.dual_norm / nu;
    if (gr.dual_norm < o.tol_g * nu) {
      res.converged = true;
      return res;
    }

    const double thr = (1.0 - o.window) * emax;
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
      if (en[i] < thr) continue;
      const auto& u = path.nodes[i];
      const auto gi = energy_gradient(G, u);
      const auto di = solve_shifted(grid, G.lambda(), gi);
      double slope = 0.0;
      for (std::size_t j = 0; j < gi.size(); ++j) slope += gi[j] * di[j];
      double a = o.step;
      for (; a > 1e-10; a *= 0.5) {
        std::vector<double> w(u.size());
        for (std::size_t j = 0; j < w.size(); ++j) w[j] = u[j] - a * di[j];
        DiscreteFunction cand(G.grid(), std::move(w));
        const double ec = energy(G, cand);
        if (ec <= en[i] - 1e-4 * a * slope) {
          path.nodes[i] = std::move(cand);
          en[i] = ec;
          break;
        }
      }
    }
    // keep the endpoint in the negative-energy region
    for (int tries = 0; en.back() >= 0.0 && tries < 30; ++tries) {
      path.nodes.back() = path.nodes.back() * 2.0;
      path.params.back() *= 2.0;
      en.back() = energy(G, path.nodes.back());
    }
    // bounded spacing where the path is high; low stretches do not affect the level
    for (std::size_t i = 0; i + 1 < path.size() && path.size() < o.max_nodes;) {
      if (std::max(en[i], en[i + 1]) < thr) {
        ++i;
        continue;
      }
      const auto d = path.nodes[i + 1] - path.nodes[i];
      if (std::sqrt(detail::b_norm_sq(G, d)) > o.spacing * nu) {
        auto mid = path.nodes[i].combine(0.5, path.nodes[i + 1], 0.5);
        en.insert(en.begin() + static_cast<long>(i + 1), energy(G, mid));
        path.nodes.insert(path.nodes.begin() + static_cast<long>(i + 1), std::move(mid));
        path.params.insert(path.params.begin() + static_cast<long>(i + 1), 0.5 * (path.params[i] + path.params[i + 1]));
      } else {
        ++i;
      }
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Shooting oracle
// ---------------------------------------------------------------------------

struct ShootingOptions {
  double r_max = 30.0;   // integration horizon (ignored on balls: R is used)
  double dr = 1e-3;
  int max_bisections = 200;
};

struct ShootingResult {
  double alpha;          // u(0)
  DiscreteFunction u;    // profile resampled onto the requested grid
  double level;          // energy from the ODE quadrature
  double r_cut;          // where the profile was truncated to zero
};

namespace detail {

enum class ShotOutcome { overshoot, undershoot, undecided };

struct Shot {
  ShotOutcome outcome;
  std::vector<double> r, u, du;
};

// u'' + (N-1)/r u' = lambda u - f(u), u(0) = alpha, u'(0) = 0.
inline Shot shoot(int N, double lambda, const NonlinearitySpec& spec, double alpha, double r_end, double dr, bool ball,
                  bool keep) {
  using State = std::array<double, 2>;
  boost::numeric::odeint::runge_kutta4<State> stepper;
  auto rhs = [&](const State& y, State& dy, double r) {
    dy[0] = y[1];
    const double drag = (N > 1 && r > 0.0) ? (N - 1) * y[1] / r : 0.0;
    dy[1] = lambda * y[0] - spec.f(0.0, y[0]) - drag;
  };
  // Taylor start off the singular point
  const double r0 = dr;
  const double curv = (lambda * alpha - spec.f(0.0, alpha)) / N;
  State y{alpha + 0.5 * curv * r0 * r0, curv * r0};
  Shot shot{ShotOutcome::undecided, {}, {}, {}};
  if (keep) {
    shot.r = {0.0, r0};
    shot.u = {alpha, y[0]};
    shot.du = {0.0, y[1]};
  }
  double r = r0;
  const auto steps = static_cast<long>(std::ceil((r_end - r0) / dr));
  for (long s = 0; s < steps; ++s) {
    const double h = std::min(dr, r_end - r);
    if (h <= 0.0) break;
    stepper.do_step(rhs, y, r, h);
    r += h;
    if (keep) {
      shot.r.push_back(r);
      shot.u.push_back(y[0]);
      shot.du.push_back(y[1]);
    }
    if (!std::isfinite(y[0])) {
      shot.outcome = ShotOutcome::overshoot;
      return shot;
    }
    if (y[0] < 0.0) {
      shot.outcome = ShotOutcome::overshoot;
      return shot;
    }
    if (!ball && y[1] > 0.0) {
      shot.outcome = ShotOutcome::undershoot;
      return shot;
    }
  }
  if (ball) shot.outcome = y[0] > 0.0 ? ShotOutcome::undershoot : ShotOutcome::overshoot;
  return shot;
}

}  // namespace detail

/// Ground state of -Delta u + lambda u = f(u) by shooting on alpha = u(0).
/// N = 1 uses the even reduction and a line grid; N >= 3 a radial grid (ball grids shoot to u(R) = 0).
inline ShootingResult radial_shooting_oracle(int N, double lambda, const NonlinearitySpec& spec,
                                             std::pair<double, double> alpha_bracket, const GridPtr& grid,
                                             const ShootingOptions& o = {}) {
  if (!spec.autonomous()) throw InvalidArgument("radial_shooting_oracle: autonomous nonlinearity required");
  if (!grid) throw InvalidArgument("radial_shooting_oracle: grid required");
  if (grid->dim() != N) throw InvalidArgument("radial_shooting_oracle: grid dimension mismatch");
  const bool ball = grid->domain() == DomainKind::ball;
  if (!(lambda > 0.0) && !ball) throw InvalidArgument("radial_shooting_oracle: lambda > 0 or a ball domain required");
  auto [lo, hi] = alpha_bracket;
  if (!(lo > 0.0 && hi > lo)) throw InvalidArgument("radial_shooting_oracle: bracket must satisfy 0 < lo < hi");
  const double r_end = ball ? grid->extent() : o.r_max;
  auto outcome = [&](double a) { return detail::shoot(N, lambda, spec, a, r_end, o.dr, ball, false).outcome; };
  if (outcome(lo) != detail::ShotOutcome::undershoot || outcome(hi) != detail::ShotOutcome::overshoot)
    throw BracketError("radial_shooting_oracle: bracket does not straddle undershoot/overshoot");
  for (int it = 0; it < o.max_bisections && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (outcome(mid) == detail::ShotOutcome::overshoot ? hi : lo) = mid;
  }
  const double alpha = 0.5 * (lo + hi);
  auto shot = detail::shoot(N, lambda, spec, alpha, r_end, o.dr, ball, true);
  // cut where |u| is smallest (the separatrix leaves there)
  std::size_t cut = shot.u.size() - 1;
  if (!ball) {
    cut = 0;
    for (std::size_t i = 1; i < shot.u.size(); ++i)
      if (std::abs(shot.u[i]) < std::abs(shot.u[cut])) cut = i;
  }
  shot.r.resize(cut + 1);
  shot.u.resize(cut + 1);
  shot.du.resize(cut + 1);
  // energy by trapezoidal quadrature in r with weight omega r^{N-1}
  const double omega = sphere_area(N);
  double level = 0.0;
  auto dens = [&](std::size_t i) {
    const double rr = shot.r[i];
    const double w = N == 1 ? 1.0 : std::pow(rr, N - 1);
    const double u = std::max(shot.u[i], 0.0);
    return w * (0.5 * shot.du[i] * shot.du[i] + 0.5 * lambda * u * u - spec.F(0.0, u));
  };
  for (std::size_t i = 1; i < shot.r.size(); ++i) level += 0.5 * (shot.r[i] - shot.r[i - 1]) * (dens(i) + dens(i - 1));
  level *= omega;
  // resample onto the grid
  MonotoneCubic prof(shot.r, shot.u, 0.0);
  auto u = DiscreteFunction::sample(grid, [&](double x) { return std::max(prof(std::abs(x)), 0.0); });
  return {alpha, std::move(u), level, shot.r.back()};
}

// ---------------------------------------------------------------------------
// Level comparison
// ---------------------------------------------------------------------------

enum class LevelRoute { automatic, kappa, descent };

struct LevelOptions {
  LevelRoute route = LevelRoute::automatic;
  DescentOptions descent;
  KappaOptions kappa;
  double strict_margin = 0.04;
  double nonstrict_tol = 0.02;
  int path_nodes = 20;
  std::optional<DiscreteFunction> seed;
};

struct LevelResult {
  double c = 0.0;
  std::string route;
  bool converged = true;
  std::optional<DiscreteFunction> candidate;
  double grad_norm = 0.0;
  int iters = 0;
};

/// Default seed: Talenti bump (critical/ball), Gaussian exp(-|x|^2 / 4) otherwise.
inline DiscreteFunction default_seed(const EnergyFunctional& G) {
  if (G.regime() != Regime::subcritical_H1) return talenti_bump(G.grid(), G.grid()->domain() == DomainKind::ball ? G.grid()->extent() / 3.0 : 1.0);
  return DiscreteFunction::sample(G.grid(), [](double x) { return std::exp(-0.25 * x * x); });
}

/// kappa route when the closed form applies (autonomous critical problems, balls with
/// homogeneous F), descent otherwise.
inline bool kappa_route_applies(const EnergyFunctional& G) {
  if (G.regime() == Regime::critical_D12) return G.spec().autonomous();
  if (G.regime() == Regime::ball_domain) return G.spec().autonomous() && G.spec().homogeneity().has_value();
  return false;
}

/// Mountain-pass level of G; +infinity when F vanishes identically (no mountain-pass geometry).
inline LevelResult mp_level(const EnergyFunctional& G, const LevelOptions& o = {}) {
  LevelResult out;
  if (G.spec().is_zero()) {
    out.c = std::numeric_limits<double>::infinity();
    out.route = "zero";
    return out;
  }
  const bool use_kappa = o.route == LevelRoute::kappa || (o.route == LevelRoute::automatic && kappa_route_applies(G));
  if (use_kappa) {
    KappaOptions ko = o.kappa;
    ko.lambda = G.lambda();
    auto kres = kappa_one(G.spec(), G.grid(), ko);
    auto cp = maximizer_to_critical_point(G.spec(), kres);
    out.c = cp.level;
    out.route = "kappa";
    out.candidate = cp.w;
    out.grad_norm = gradient_residual(G, cp.w).dual_norm / std::sqrt(G.norm_sq(cp.w));
    out.iters = kres.iterations;
    return out;
  }
  auto seed = o.seed ? *o.seed : default_seed(G);
  auto path = initial_path(G, seed, o.path_nodes);
  auto d = mp_level_descent(G, std::move(path), o.descent);
  out.c = d.c_est;
  out.route = "descent";
  out.converged = d.converged;
  out.candidate = d.candidate;
  out.grad_norm = d.grad_norm;
  out.iters = d.iters;
  return out;
}

struct LevelReport {
  double c = 0.0;
  LevelResult primary;
  std::map<std::string, double> c_sharp;
  std::map<std::string, bool> strict_flags;     // c < c_# (1 - margin)
  std::map<std::string, bool> nonstrict_ok;     // c <= c_# (1 + tol)
  double margin = 0.04;
  double nonstrict_tol = 0.02;
};

/// Levels of G and of each named asymptotic functional, with the strict and non-strict verdicts.
inline LevelReport mp_level_report(const EnergyFunctional& G,
                                   const std::vector<std::pair<std::string, EnergyFunctional>>& asymptotic,
                                   const LevelOptions& o = {}) {
  LevelReport rep;
  rep.margin = o.strict_margin;
  rep.nonstrict_tol = o.nonstrict_tol;
  rep.primary = mp_level(G, o);
  rep.c = rep.primary.c;
  for (const auto& [name, Gs] : asymptotic) {
    LevelOptions oo = o;
    oo.seed.reset();
    const double cs = mp_level(Gs, oo).c;
    rep.c_sharp[name] = cs;
    rep.strict_flags[name] = rep.c < cs * (1.0 - o.strict_margin);
    rep.nonstrict_ok[name] = rep.c <= cs * (1.0 + o.nonstrict_tol);
  }
  return rep;
}

}  // namespace ccmp
