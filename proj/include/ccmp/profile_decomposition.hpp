#pragma once
//
// Profile decomposition of bounded sequences under the dilation group
// (radial grids, N >= 3) or the translation group (line grids):
//
//     u_k  ~  sum_n  g_k^(n) w^(n)  +  r_k,    r_k -> 0 in L^{2*} (L^4 on lines).
//
// Weak limits are replaced by tail averages of pulled-back remainders and
// refined by backfitting; group elements are located by overlap with a fixed
// template (Talenti bump or sech) in the energy inner product.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ccmp/error.hpp"
#include "ccmp/function_space.hpp"
#include "ccmp/nonlinearity.hpp"
#include "ccmp/sphere_maximizer.hpp"

namespace ccmp {

enum class ProfileClass { N0, Nplus, Nminus };

inline const char* to_string(ProfileClass c) {
  switch (c) {
    case ProfileClass::N0: return "N0";
    case ProfileClass::Nplus: return "Nplus";
    case ProfileClass::Nminus: return "Nminus";
  }
  return "?";
}

struct ProfileItem {
  DiscreteFunction w;
  std::vector<int> j;      // dilation indices (radial grids; zero on lines)
  std::vector<double> y;   // centers (line grids; zero on radial grids)
  ProfileClass cls = ProfileClass::N0;
  double norm_sq = 0.0;
  double j_slope = 0.0;    // least-squares slope of j_k against k
  double y_slope = 0.0;    // least-squares slope of y_k against k
  bool escapes = false;    // unbounded centers (translation profiles)
};

struct Decomposition {
  std::vector<ProfileItem> items;
  std::vector<double> remainder;  // relative L^{2*} (L^4 on lines) of r_k, per k
  double sum_norms = 0.0;         // sum_n |w^(n)|^2
  double limsup_norm = 0.0;       // max over the tail of |u_k|^2
  bool complete = true;           // final remainder below tol_remainder
  double gamma = 2.0;
  double lambda = 1.0;            // mass of the line-grid norm
};

struct DecomposeOptions {
  double tol_remainder = 0.05;
  int max_profiles = 4;
  int j_min = -4;                 // dilation scan window (radial)
  std::optional<int> j_max;       // default: sequence length + 2
  double floor_fraction = 0.01;   // extraction floor relative to max |u_k|^2
  int backfit_sweeps = 6;
  double lambda = 1.0;            // H^1 mass on line grids
  double template_width = 1.0;
};

namespace detail {

inline double space_norm_sq(const DiscreteFunction& u, double lambda) {
  return u.grid()->is_line() ? dirichlet_seminorm_sq(u) + lambda * l2_norm_sq(u) : dirichlet_seminorm_sq(u);
}
inline double space_inner(const DiscreteFunction& u, const DiscreteFunction& v, double lambda) {
  return u.grid()->is_line() ? dirichlet_inner(u, v) + lambda * l2_inner(u, v) : dirichlet_inner(u, v);
}
inline double remainder_exponent(const Grid& g) { return g.is_line() ? 4.0 : critical_exponent(g.dim()); }

inline DiscreteFunction push(const DiscreteFunction& w, int j, double y, double gamma) {
  return w.grid()->is_line() ? translate(w, y) : unitary_dilate(w, j, gamma);
}
inline DiscreteFunction pull(const DiscreteFunction& r, int j, double y, double gamma) {
  return r.grid()->is_line() ? translate(r, -y) : unitary_dilate(r, -j, gamma);
}

inline double ls_slope(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  if (v.size() < 2) return 0.0;
  const double kbar = 0.5 * (n - 1.0);
  const double vbar = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    num += (k - kbar) * (v[k] - vbar);
    den += (k - kbar) * (k - kbar);
  }
  return num / den;
}

inline std::size_t tail_start(std::size_t n) { return n - std::max<std::size_t>(1, n / 4); }

}  // namespace detail

/// u_k = w + sum_m g_k^(m) w_m with g_k^(m) from the schedules (dilation index j or center y).
struct BumpSchedule {
  DiscreteFunction w;
  std::vector<int> j;
  std::vector<double> y;
};

inline std::vector<DiscreteFunction> synth_multibump(const DiscreteFunction& w, const std::vector<BumpSchedule>& bumps,
                                                     std::size_t length, double gamma = 2.0) {
  if (length == 0) throw InvalidArgument("synth_multibump: length must be positive");
  const bool line = w.grid()->is_line();
  std::vector<DiscreteFunction> out;
  for (std::size_t k = 0; k < length; ++k) {
    DiscreteFunction u = w;
    for (const auto& b : bumps) {
      b.w.check_same_grid(w);
      const int j = line ? 0 : (k < b.j.size() ? b.j[k] : throw InvalidArgument("synth_multibump: j schedule too short"));
      const double y = line ? (k < b.y.size() ? b.y[k] : throw InvalidArgument("synth_multibump: y schedule too short")) : 0.0;
      auto g = detail::push(b.w, j, y, gamma);
      const double n0 = detail::space_norm_sq(b.w, 1.0), n1 = detail::space_norm_sq(g, 1.0);
      if (std::abs(n1 - n0) > 0.05 * n0)
        throw OutOfRange("synth_multibump: schedule leaves the grid's resolution window at k = " + std::to_string(k));
      u = u + g;
    }
    out.push_back(std::move(u));
  }
  return out;
}

namespace detail {

inline std::vector<double> remainders(const std::vector<DiscreteFunction>& seq, const std::vector<ProfileItem>& items,
                                      double gamma, std::vector<DiscreteFunction>* keep = nullptr) {
  const double p = remainder_exponent(*seq.front().grid());
  std::vector<double> rel(seq.size());
  if (keep) keep->clear();
  for (std::size_t k = 0; k < seq.size(); ++k) {
    DiscreteFunction r = seq[k];
    for (const auto& it : items) r = r - push(it.w, it.j[k], it.y[k], gamma);
    const double base = lp_norm(seq[k], p);
    rel[k] = base > 0.0 ? lp_norm(r, p) / base : 0.0;
    if (keep) keep->push_back(std::move(r));
  }
  return rel;
}

inline DiscreteFunction tail_average(const std::vector<DiscreteFunction>& rs, const ProfileItem& it, double gamma) {
  const std::size_t n = rs.size(), k0 = tail_start(n);
  std::vector<double> acc(rs.front().size(), 0.0);
  for (std::size_t k = k0; k < n; ++k) {
    auto p = pull(rs[k], it.j[k], it.y[k], gamma);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
  }
  for (double& a : acc) a /= static_cast<double>(n - k0);
  return {rs.front().grid(), std::move(acc)};
}

/// u clamped below radius r: u(max(r, rho)) nodewise. Differences of these split u
/// into pieces whose Dirichlet energies add exactly.
inline DiscreteFunction clamp_below(const DiscreteFunction& u, double rho) {
  const auto& x = u.grid()->nodes();
  const auto c = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), rho) - x.begin());
  if (c == 0) return u;
  if (c >= x.size()) return DiscreteFunction::zeros(u.grid());
  std::vector<double> v = u.values();
  for (std::size_t i = 0; i < c; ++i) v[i] = v[c];
  return {u.grid(), std::move(v)};
}

/// The scale band of u_k owned by the profiles at dilation index j: cut at the
/// geometric midpoints towards the neighbouring occupied indices.
inline DiscreteFunction scale_band(const DiscreteFunction& u, const std::vector<int>& occupied, int j, double gamma) {
  std::optional<int> below, above;  // nearest occupied indices below and above j
  for (int m : occupied) {
    if (m < j && (!below || m > *below)) below = m;
    if (m > j && (!above || m < *above)) above = m;
  }
  // larger index lives at smaller radius
  DiscreteFunction outer = below ? clamp_below(u, std::pow(gamma, -0.5 * (j + *below))) : DiscreteFunction::zeros(u.grid());
  DiscreteFunction inner = above ? clamp_below(u, std::pow(gamma, -0.5 * (j + *above))) : u;
  return below ? inner - outer : inner;
}

/// The spatial cell of u_k owned by the profiles centred at y: u restricted to the
/// nodes closer to y than to any other occupied center (ties go left). Cells sum to u.
inline DiscreteFunction spatial_cell(const DiscreteFunction& u, const std::vector<double>& centers, double y, double h) {
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  for (double c : centers) {
    if (c < y - 0.5 * h) lo = std::max(lo, 0.5 * (c + y));
    if (c > y + 0.5 * h) hi = std::min(hi, 0.5 * (c + y));
  }
  std::vector<double> v = u.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = u.grid()->node(i);
    if (!(x > lo && x <= hi)) v[i] = 0.0;
  }
  return {u.grid(), std::move(v)};
}

}  // namespace detail

/// Greedy extraction with backfitting; see the header comment.
inline Decomposition decompose(const std::vector<DiscreteFunction>& u_seq, double gamma, const DecomposeOptions& o = {}) {
  if (u_seq.size() < 8) throw InvalidArgument("decompose: sequence length must be at least 8");
  if (!(gamma > 1.0)) throw InvalidArgument("decompose: gamma must exceed 1");
  const auto& grid = u_seq.front().grid();
  for (const auto& u : u_seq) u.check_same_grid(u_seq.front());
  const bool line = grid->is_line();
  const std::size_t n = u_seq.size();
  const double lam = o.lambda;

  Decomposition dec;
  dec.gamma = gamma;
  dec.lambda = lam;
  double max_norm = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = detail::space_norm_sq(u_seq[k], lam);
    if (!std::isfinite(v)) throw InvalidArgument("decompose: unbounded input");
    max_norm = std::max(max_norm, v);
    if (k >= detail::tail_start(n)) dec.limsup_norm = std::max(dec.limsup_norm, v);
  }
  if (max_norm == 0.0) {
    dec.remainder.assign(n, 0.0);
    return dec;
  }
  const double floor = o.floor_fraction * max_norm;

  // templates pushed over the scan window
  const double h = line ? grid->h() : 0.0;
  std::vector<int> js;
  std::vector<double> ys;
  std::vector<DiscreteFunction> templates;
  if (line) {
    const auto T = DiscreteFunction::sample(grid, [&](double x) { return 1.0 / std::cosh(x / o.template_width); });
    const long steps = static_cast<long>(std::floor(grid->extent() / h));
    for (long s = -steps + 1; s < steps; ++s) {
      ys.push_back(static_cast<double>(s) * h);
    }
    templates.push_back(T);
  } else {
    const auto T = talenti_bump(grid, o.template_width);
    const int jmax = o.j_max.value_or(static_cast<int>(n) + 2);
    for (int j = o.j_min; j <= jmax; ++j) {
      js.push_back(j);
      templates.push_back(unitary_dilate(T, j, gamma));
    }
  }
  const double Tn = detail::space_norm_sq(templates.front(), lam);

  // best group element for a residual: (j, y, projection coefficient onto the pushed template)
  struct Hit {
    int j;
    double y;
    double coeff;
  };
  auto locate = [&](const DiscreteFunction& r) -> Hit {
    if (!line) {
      std::size_t best = 0;
      double bs = -1.0, bc = 0.0;
      for (std::size_t a = 0; a < templates.size(); ++a) {
        const double ip = detail::space_inner(r, templates[a], lam);
        if (ip * ip > bs) { bs = ip * ip; best = a; bc = ip / Tn; }
      }
      return {js[best], 0.0, bc};
    }
    // coarse lattice, then every node nearby
    const long stride = std::max<long>(1, std::lround(0.5 / h));
    auto ip_at = [&](std::size_t a) { return detail::space_inner(r, translate(templates.front(), ys[a]), lam); };
    std::size_t best = 0;
    double bs = -1.0, bc = 0.0;
    auto consider = [&](std::size_t a) {
      const double ip = ip_at(a);
      if (ip * ip > bs) { bs = ip * ip; best = a; bc = ip / Tn; }
    };
    for (std::size_t a = 0; a < ys.size(); a += static_cast<std::size_t>(stride)) consider(a);
    const std::size_t c = best, st = static_cast<std::size_t>(stride);
    for (std::size_t a = c > st ? c - st : 0; a <= std::min(ys.size() - 1, c + st); ++a) consider(a);
    return {0, ys[best], bc};
  };
  auto pushed_template = [&](int j, double y) {
    if (line) return translate(templates.front(), y);
    return templates[static_cast<std::size_t>(j - o.j_min)];
  };

  // Schedules come from matching pursuit on template residuals s_k (robust to the
  // overlap of neighbouring dilation scales); profiles from backfitted tail averages.
  // Profiles from tail averages. Each u_k is first cut into scale bands (radial) or
  // spatial cells (line), so profiles at well separated group elements do not leak
  // into each other's average. Profiles sharing a band or cell are backfitted.
  auto refit = [&]() {
    auto& items = dec.items;
    const std::size_t k0 = detail::tail_start(n);
    for (int sweep = 0; sweep < o.backfit_sweeps; ++sweep) {
      for (std::size_t a = 0; a < items.size(); ++a) {
        std::vector<double> acc(grid->size(), 0.0);
        for (std::size_t k = k0; k < n; ++k) {
          DiscreteFunction r = u_seq[k];
          if (line) {
            std::vector<double> occ;
            for (const auto& it : items) occ.push_back(it.y[k]);
            r = detail::spatial_cell(r, occ, items[a].y[k], h);
          } else {
            std::vector<int> occ;
            for (const auto& it : items) occ.push_back(it.j[k]);
            r = detail::scale_band(r, occ, items[a].j[k], gamma);
          }
          for (std::size_t b = 0; b < items.size(); ++b) {
            const bool shared = line ? std::abs(items[b].y[k] - items[a].y[k]) <= 0.5 * h : items[b].j[k] == items[a].j[k];
            if (b == a || !shared) continue;
            r = r - detail::push(items[b].w, items[b].j[k], items[b].y[k], gamma);
          }
          const auto p = detail::pull(r, items[a].j[k], items[a].y[k], gamma);
          for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
        }
        for (double& v : acc) v /= static_cast<double>(n - k0);
        items[a].w = DiscreteFunction(grid, std::move(acc));
      }
    }
  };

  std::vector<DiscreteFunction> s = u_seq;
  dec.remainder = detail::remainders(u_seq, dec.items, gamma);
  const std::size_t tail = detail::tail_start(n);
  while (static_cast<int>(dec.items.size()) < o.max_profiles && dec.remainder.back() >= o.tol_remainder) {
    ProfileItem it{DiscreteFunction::zeros(grid), std::vector<int>(n, 0), std::vector<double>(n, 0.0)};
    std::vector<double> coeff(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Hit hit = locate(s[k]);
      it.j[k] = hit.j;
      it.y[k] = hit.y;
      coeff[k] = hit.coeff;
    }
    // a schedule already owned by a profile on the tail carries no new information
    bool duplicate = false;
    for (const auto& prev : dec.items) {
      bool same = true;
      for (std::size_t k = tail; k < n; ++k) same = same && prev.j[k] == it.j[k] && std::abs(prev.y[k] - it.y[k]) < 0.5 * std::max(h, 1e-300);
      duplicate = duplicate || same;
    }
    if (duplicate) break;
    for (std::size_t k = 0; k < n; ++k) s[k] = s[k] - pushed_template(it.j[k], it.y[k]) * coeff[k];

    std::vector<DiscreteFunction> rs;
    detail::remainders(u_seq, dec.items, gamma, &rs);
    it.w = detail::tail_average(rs, it, gamma);
    dec.items.push_back(std::move(it));
    refit();
    if (detail::space_norm_sq(dec.items.back().w, lam) < floor) {
      dec.items.pop_back();
      break;
    }
    dec.remainder = detail::remainders(u_seq, dec.items, gamma);
  }

  // prune, classify, normalize representatives
  std::vector<ProfileItem> kept;
  for (auto& it : dec.items) {
    it.norm_sq = detail::space_norm_sq(it.w, lam);
    if (it.norm_sq < floor) continue;
    std::vector<double> jd(it.j.begin(), it.j.end());
    it.j_slope = detail::ls_slope(jd);
    it.y_slope = detail::ls_slope(it.y);
    it.cls = it.j_slope > 0.5 ? ProfileClass::Nplus : it.j_slope < -0.5 ? ProfileClass::Nminus : ProfileClass::N0;
    if (it.cls == ProfileClass::N0 && !line) {
      // representative with j_k = 0
      std::vector<int> sorted = it.j;
      std::sort(sorted.begin(), sorted.end());
      const int jbar = sorted[sorted.size() / 2];
      if (jbar != 0) it.w = unitary_dilate(it.w, jbar, gamma);
      std::fill(it.j.begin(), it.j.end(), 0);
    }
    if (line) {
      // early members may overlap and blur the located centers; judge on the tail
      const auto [mn, mx] = std::minmax_element(it.y.begin() + static_cast<long>(tail), it.y.end());
      if (*mx - *mn <= h * (1.0 + 1e-9)) {
        // bounded centers: fold the offset into the profile (convention, threshold one cell)
        std::vector<double> sorted(it.y.begin() + static_cast<long>(tail), it.y.end());
        std::sort(sorted.begin(), sorted.end());
        const double ybar = sorted[sorted.size() / 2];
        if (ybar != 0.0) it.w = translate(it.w, ybar);
        std::fill(it.y.begin(), it.y.end(), 0.0);
      } else {
        it.escapes = true;
      }
    }
    it.norm_sq = detail::space_norm_sq(it.w, lam);
    kept.push_back(std::move(it));
  }
  std::stable_sort(kept.begin(), kept.end(), [](const ProfileItem& a, const ProfileItem& b) {
    const bool a0 = a.cls == ProfileClass::N0 && !a.escapes, b0 = b.cls == ProfileClass::N0 && !b.escapes;
    if (a0 != b0) return a0;
    return a.norm_sq > b.norm_sq;
  });
  dec.items = std::move(kept);
  dec.remainder = detail::remainders(u_seq, dec.items, gamma);
  dec.sum_norms = 0.0;
  for (const auto& it : dec.items) dec.sum_norms += it.norm_sq;
  dec.complete = dec.remainder.back() < o.tol_remainder;
  return dec;
}

struct DecompositionCheck {
  bool norms_ok = true;
  bool separation_ok = true;
  bool remainder_ok = true;
  double norm_ratio = 0.0;  // sum |w|^2 / limsup |u_k|^2
};

/// Checks the norm ledger (within `norm_tol`), pairwise separation of the schedules
/// and the final remainder.
inline DecompositionCheck verify_decomposition(const std::vector<DiscreteFunction>& u_seq, const Decomposition& dec,
                                               double tol_remainder = 0.05, double norm_tol = 0.03) {
  DecompositionCheck out;
  if (dec.items.empty()) {
    out.remainder_ok = dec.remainder.empty() || dec.remainder.back() < tol_remainder;
    return out;
  }
  const std::size_t n = u_seq.size();
  out.norm_ratio = dec.limsup_norm > 0.0 ? dec.sum_norms / dec.limsup_norm : 0.0;
  out.norms_ok = dec.sum_norms <= dec.limsup_norm * (1.0 + norm_tol);
  for (std::size_t a = 0; a < dec.items.size(); ++a)
    for (std::size_t b = a + 1; b < dec.items.size(); ++b) {
      const auto& p = dec.items[a];
      const auto& q = dec.items[b];
      std::vector<double> sep(n);
      for (std::size_t k = 0; k < n; ++k)
        sep[k] = std::abs(p.j[k] - q.j[k]) + std::abs(std::pow(dec.gamma, p.j[k]) * (p.y[k] - q.y[k]));
      // strictly increasing from some k0 in the first half on
      bool ok = false;
      for (std::size_t k0 = 0; k0 <= n / 2 && !ok; ++k0) {
        bool inc = true;
        for (std::size_t k = k0 + 1; k < n; ++k) inc = inc && sep[k] > sep[k - 1];
        ok = inc;
      }
      out.separation_ok = out.separation_ok && ok;
    }
  out.remainder_ok = !dec.remainder.empty() && dec.remainder.back() < tol_remainder;
  return out;
}

struct EnergySplit {
  double lhs = 0.0;  // tail average of int F(u_k)
  double rhs = 0.0;  // class-weighted sum over profiles
  double gap = 0.0;  // |lhs - rhs| / max(|lhs|, |rhs|)
  std::vector<double> contributions;
};

/// Splitting of int F(u_k) along a decomposition: bounded-center N0 profiles carry F,
/// escaping centers F_0 (spatial limit), Nplus F_+, Nminus F_-.
inline EnergySplit energy_split(const NonlinearitySpec& spec, const std::vector<DiscreteFunction>& u_seq,
                                const Decomposition& dec) {
  EnergySplit out;
  const std::size_t n = u_seq.size(), k0 = detail::tail_start(n);
  for (std::size_t k = k0; k < n; ++k) out.lhs += composite_integral(u_seq[k], spec);
  out.lhs /= static_cast<double>(n - k0);
  const auto fam = asymptotic_family(spec);
  for (const auto& it : dec.items) {
    const AsymptoticLimit* lim = nullptr;
    if (it.cls == ProfileClass::Nplus) lim = &fam.Fplus;
    else if (it.cls == ProfileClass::Nminus) lim = &fam.Fminus;
    else if (it.escapes) lim = &fam.F0;
    double c = 0.0;
    if (!lim) {
      c = composite_integral(it.w, spec);
    } else {
      if (!lim->available || !lim->F || !lim->certified)
        throw DivergenceError("energy_split: asymptotic limit needed for a profile is not certified");
      c = lim->F->is_zero() ? 0.0 : composite_integral(it.w, *lim->F, false);
    }
    out.contributions.push_back(c);
    out.rhs += c;
  }
  const double scale = std::max(std::abs(out.lhs), std::abs(out.rhs));
  out.gap = scale > 0.0 ? std::abs(out.lhs - out.rhs) / scale : 0.0;
  return out;
}

}  // namespace ccmp
