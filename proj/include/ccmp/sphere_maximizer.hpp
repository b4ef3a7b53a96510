#pragma once
//
// kappa(t) = sup { psi(u) : |u|^2 = t } by projected gradient ascent on the
// sphere of the energy norm, and the rescaling of a sphere maximizer into a
// critical point of G.
//
// The constraint norm is Q(u) = int |u'|^2 + lambda |u|^2 with lambda taken from
// the options (0 gives the Dirichlet sphere). Ascent directions are Riesz
// representers in the Q inner product, so the iteration count is insensitive
// to the mesh.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "ccmp/error.hpp"
#include "ccmp/function_space.hpp"
#include "ccmp/functional.hpp"
#include "ccmp/nonlinearity.hpp"

namespace ccmp {

struct KappaOptions {
  int starts = 4;          // seeds at widths base_width * gamma^{k/starts}
  double step = 0.5;       // initial step, in units of 1/|Lagrange multiplier|
  int max_iter = 20000;
  double tol = 1e-7;       // tangential / normal gradient ratio at convergence
  double stall_tol = 1e-5; // stop when psi gains less than this (relative) over 200 iterations
  double lambda = 0.0;     // mass term of the constraint norm
  double target = 1.0;     // sphere level t
  double base_width = 0.0; // 0: 1 on whole-space grids, R/3 on balls
};

struct KappaResult {
  double kappa1 = 0.0;  // sup psi on the sphere of level `target`, normalized to t = 1 when target = 1
  DiscreteFunction maximizer;
  int starts_used = 0;
  double best_gradient_norm = 0.0;
  std::vector<double> start_values;
  int iterations = 0;
  double lambda = 0.0;
  double target = 1.0;
};

namespace detail {

inline double constraint_sq(const DiscreteFunction& u, double lambda) {
  return dirichlet_seminorm_sq(u) + (lambda != 0.0 ? lambda * l2_norm_sq(u) : 0.0);
}

struct AscentOutcome {
  DiscreteFunction u;
  double psi;
  double stationarity;
  int iterations;
};

inline AscentOutcome sphere_ascent(const NonlinearitySpec& spec, DiscreteFunction u, const KappaOptions& o) {
  const auto& g = *u.grid();
  const std::size_t n = g.size();
  const double t = o.target;
  auto normalize = [&](const DiscreteFunction& v) {
    const double q = constraint_sq(v, o.lambda);
    if (!(q > 0.0)) throw InvalidArgument("sphere_ascent: degenerate iterate");
    return v * std::sqrt(t / q);
  };
  u = normalize(u);
  double psi = composite_integral(u, spec);
  double alpha = -1.0;
  double stat = std::numeric_limits<double>::infinity();
  int it = 0;
  std::vector<double> d(n), dir(n);
  double psi_ref = psi;
  for (; it < o.max_iter; ++it) {
    // stagnation: slow drift along the (nearly) flat dilation direction
    if (it > 0 && it % 200 == 0) {
      if (psi - psi_ref <= o.stall_tol * std::abs(psi)) break;
      psi_ref = psi;
    }
    for (std::size_t i = 0; i < n; ++i)
      d[i] = (g.pinned(i) || u[i] == 0.0) ? 0.0 : g.mass()[i] * spec.f(g.node(i), u[i]);
    const auto G = solve_shifted(g, o.lambda, d);
    double ud = 0.0, Gd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ud += u[i] * d[i];
      Gd += G[i] * d[i];
    }
    const double nu = ud / t;  // Lagrange multiplier
    const double tang_sq = std::max(0.0, Gd - nu * nu * t);
    stat = std::sqrt(tang_sq) / std::max(std::abs(nu) * std::sqrt(t), 1e-300);
    if (stat < o.tol) break;
    if (alpha < 0.0) alpha = o.step / std::max(std::abs(nu), 1e-12);
    for (std::size_t i = 0; i < n; ++i) dir[i] = G[i] - nu * u[i];
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<double> w(n);
      for (std::size_t i = 0; i < n; ++i) w[i] = u[i] + alpha * dir[i];
      auto cand = normalize(DiscreteFunction(u.grid(), std::move(w)));
      const double pc = composite_integral(cand, spec);
      if (pc > psi) {
        u = std::move(cand);
        psi = pc;
        alpha *= 1.5;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no ascent possible at machine precision
  }
  return {std::move(u), psi, stat, it};
}

inline double default_width(const Grid& g, const KappaOptions& o) {
  if (o.base_width > 0.0) return o.base_width;
  return g.domain() == DomainKind::ball ? g.extent() / 3.0 : 1.0;
}

}  // namespace detail

/// Talenti-shaped bump (1 + (r/w)^2)^{-(N-2)/2}, tapered by 1 - (r/R)^2 on balls.
inline DiscreteFunction talenti_bump(const GridPtr& grid, double width) {
  const int N = grid->dim();
  const double R = grid->extent();
  const bool ball = grid->domain() == DomainKind::ball;
  return DiscreteFunction::sample(grid, [&](double r) {
    const double z = r / width;
    const double v = std::pow(1.0 + z * z, -0.5 * (N - 2));
    return ball ? v * (1.0 - (r / R) * (r / R)) : v;
  });
}

/// Sup of psi on the sphere Q(u) = opts.target, by multistart projected ascent.
inline KappaResult kappa_one(const NonlinearitySpec& spec, const GridPtr& grid, const KappaOptions& opts = {}) {
  if (!grid || grid->is_line()) throw InvalidArgument("kappa_one: radial grid required");
  if (spec.dim() != grid->dim()) throw InvalidArgument("kappa_one: nonlinearity and grid disagree on N");
  if (opts.starts < 1) throw InvalidArgument("kappa_one: at least one start required");
  if (!(opts.target > 0.0)) throw InvalidArgument("kappa_one: sphere level must be positive");
  if (negative_pivots(*grid, opts.lambda) != 0) throw InvalidArgument("kappa_one: constraint norm not positive definite");
  const double w0 = detail::default_width(*grid, opts);
  KappaResult best{0.0, DiscreteFunction::zeros(grid), 0, 0.0, {}, 0, opts.lambda, opts.target};
  bool have = false;
  for (int k = 0; k < opts.starts; ++k) {
    const double width = w0 * std::pow(spec.gamma(), static_cast<double>(k) / opts.starts);
    auto out = detail::sphere_ascent(spec, talenti_bump(grid, width), opts);
    best.start_values.push_back(out.psi);
    best.iterations += out.iterations;
    ++best.starts_used;
    if (!have || out.psi > best.kappa1) {
      best.kappa1 = out.psi;
      best.maximizer = std::move(out.u);
      best.best_gradient_norm = out.stationarity;
      have = true;
    }
  }
  if (!(best.kappa1 > 0.0)) throw NoMountainError("kappa_one: no positive value of psi found on the sphere");
  return best;
}

/// kappa(t) = kappa(1) t^{2*/2}.
inline double kappa(const KappaResult& kres, double t) {
  if (!(t > 0.0)) throw InvalidArgument("kappa: t must be positive");
  const int N = kres.maximizer.grid()->dim();
  return kres.kappa1 * std::pow(t, 0.5 * critical_exponent(N));
}

/// Independent maximization on the sphere of level t.
inline double kappa_remaximized(const NonlinearitySpec& spec, const GridPtr& grid, double t, KappaOptions opts = {}) {
  opts.target = t;
  return kappa_one(spec, grid, opts).kappa1;
}

struct KappaComparison {
  double kappa1 = 0.0;
  std::optional<double> kappa_plus1, kappa_minus1;  // empty: limit unavailable (diverges)
  bool strict = false;
  double margin = 0.04;
};

/// kappa(1) against kappa_+(1) and kappa_-(1); strict when kappa(1) exceeds both by the margin.
inline KappaComparison compare_kappas(const NonlinearitySpec& spec, const GridPtr& grid, const KappaOptions& opts = {},
                                      double margin = 0.04) {
  KappaComparison out;
  out.margin = margin;
  out.kappa1 = kappa_one(spec, grid, opts).kappa1;
  const auto fam = asymptotic_family(spec);
  auto side = [&](const AsymptoticLimit& lim) -> std::optional<double> {
    if (!lim.available || !lim.F) return std::nullopt;
    if (lim.F->is_zero()) return 0.0;
    try {
      return kappa_one(*lim.F, grid, opts).kappa1;
    } catch (const NoMountainError&) {
      return 0.0;
    }
  };
  out.kappa_plus1 = side(fam.Fplus);
  out.kappa_minus1 = side(fam.Fminus);
  double others = 0.0;
  for (const auto& k : {out.kappa_plus1, out.kappa_minus1})
    if (k) others = std::max(others, *k);
  out.strict = others > 0.0 ? out.kappa1 > others * (1.0 + margin) : out.kappa1 > 0.0;
  return out;
}

struct CriticalPoint {
  DiscreteFunction w;
  double level;           // max_r 1/2 r^2 - kappa(1) r^{2*} (closed form)
  double norm_sq;         // Q(w)
  double t0_derived;      // (2* kappa(1))^{-(N-2)/2}: norm level where the dilation-path maximum sits at t = 1
  double t0_printed;      // (2* kappa(1))^{-2/(N-2)}
  bool t0_mismatch;       // the two readings differ (all N except 4)
};

/// Moves a sphere maximizer to the norm level of a critical point of G.
/// Homogeneous F: amplitude scaling. Other autonomous F (whole space, lambda = 0): dilation.
inline CriticalPoint maximizer_to_critical_point(const NonlinearitySpec& spec, const KappaResult& kres) {
  if (!(kres.kappa1 > 0.0)) throw InvalidArgument("maximizer_to_critical_point: kappa(1) must be positive");
  const auto& grid = kres.maximizer.grid();
  const int N = grid->dim();
  const double q = critical_exponent(N);
  // normalize to the unit sphere
  const double k1 = kres.kappa1 / std::pow(kres.target, 0.5 * q);
  const DiscreteFunction v = kres.maximizer * (1.0 / std::sqrt(kres.target));
  CriticalPoint out{DiscreteFunction::zeros(grid), 0.0, 0.0, 0.0, 0.0, false};
  out.t0_derived = std::pow(q * k1, -0.5 * (N - 2));
  out.t0_printed = std::pow(q * k1, -2.0 / (N - 2));
  out.t0_mismatch = std::abs(out.t0_derived - out.t0_printed) > 1e-9 * out.t0_derived;
  if (auto p = spec.homogeneity()) {
    // psi(r v) = r^p kappa(1); maximize 1/2 r^2 - r^p kappa(1)
    const double r2 = std::pow(*p * k1, -2.0 / (*p - 2.0));
    out.w = v * std::sqrt(r2);
    out.level = 0.5 * r2 - k1 * std::pow(r2, 0.5 * *p);
  } else {
    if (!spec.autonomous() || kres.lambda != 0.0 || grid->domain() == DomainKind::ball)
      throw InvalidArgument("maximizer_to_critical_point: non-homogeneous F needs the dilation-invariant setting");
    out.w = dilate(v, std::pow(out.t0_derived, 1.0 / (N - 2)));
    out.level = 0.5 * out.t0_derived - k1 * std::pow(out.t0_derived, 0.5 * q);
  }
  out.norm_sq = detail::constraint_sq(out.w, kres.lambda);
  return out;
}

}  // namespace ccmp
