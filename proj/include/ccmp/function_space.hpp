#pragma once
//
// Nodal functions on radial and line grids, quadrature norms, the discrete
// operator -Delta + lambda, and the dilation/translation group actions.
//

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ccmp/error.hpp"
#include "ccmp/grid.hpp"
#include "ccmp/interpolation.hpp"
#include "ccmp/nonlinearity.hpp"

namespace ccmp {

/// Nodal values on a grid. Values are fixed at construction; pinned (Dirichlet)
/// nodes are forced to zero.
class DiscreteFunction {
 public:
  DiscreteFunction(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), v_(std::move(values)) {
    if (!grid_) throw InvalidArgument("DiscreteFunction: null grid");
    if (v_.size() != grid_->size()) throw InvalidArgument("DiscreteFunction: value count does not match grid");
    for (std::size_t i = 0; i < v_.size(); ++i) {
      if (!std::isfinite(v_[i])) throw InvalidArgument("DiscreteFunction: non-finite nodal value");
      if (grid_->pinned(i)) v_[i] = 0.0;
    }
  }

  static DiscreteFunction zeros(GridPtr grid) {
    const auto n = grid->size();
    return {std::move(grid), std::vector<double>(n, 0.0)};
  }

  template <class Fn>
  static DiscreteFunction sample(GridPtr grid, Fn&& fn) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid->node(i));
    return {std::move(grid), std::move(v)};
  }

  const GridPtr& grid() const { return grid_; }
  const std::vector<double>& values() const { return v_; }
  double operator[](std::size_t i) const { return v_[i]; }
  std::size_t size() const { return v_.size(); }

  DiscreteFunction operator+(const DiscreteFunction& o) const { return combine(1.0, o, 1.0); }
  DiscreteFunction operator-(const DiscreteFunction& o) const { return combine(1.0, o, -1.0); }
  DiscreteFunction operator*(double a) const { return combine(a, *this, 0.0); }
  friend DiscreteFunction operator*(double a, const DiscreteFunction& u) { return u * a; }

  /// a * this + b * o.
  DiscreteFunction combine(double a, const DiscreteFunction& o, double b) const {
    check_same_grid(o);
    std::vector<double> w(v_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = a * v_[i] + b * o.v_[i];
    return {grid_, std::move(w)};
  }

  void check_same_grid(const DiscreteFunction& o) const {
    if (grid_ != o.grid_ && !grid_->same_as(*o.grid_))
      throw InvalidArgument("DiscreteFunction: operands live on different grids");
  }

 private:
  GridPtr grid_;
  std::vector<double> v_;
};

// ---------------------------------------------------------------------------
// Norms and integrals
// ---------------------------------------------------------------------------

/// Dirichlet form of piecewise-linear interpolants, integrated exactly per cell.
inline double dirichlet_inner(const DiscreteFunction& u, const DiscreteFunction& v) {
  u.check_same_grid(v);
  const auto& c = u.grid()->stiffness();
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) acc += c[i] * (u[i + 1] - u[i]) * (v[i + 1] - v[i]);
  return acc;
}

inline double dirichlet_seminorm_sq(const DiscreteFunction& u) { return dirichlet_inner(u, u); }

inline double l2_inner(const DiscreteFunction& u, const DiscreteFunction& v) {
  u.check_same_grid(v);
  const auto& m = u.grid()->mass();
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) acc += m[i] * u[i] * v[i];
  return acc;
}

inline double l2_norm_sq(const DiscreteFunction& u) { return l2_inner(u, u); }

inline double lp_norm(const DiscreteFunction& u, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("lp_norm: p must be >= 1");
  const auto& m = u.grid()->mass();
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) acc += m[i] * std::pow(std::abs(u[i]), p);
  return std::pow(acc, 1.0 / p);
}

/// int |u'|^2 + lambda |u|^2; lambda must be positive.
inline double h1_norm_sq(const DiscreteFunction& u, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("h1_norm_sq: lambda must be positive");
  return dirichlet_seminorm_sq(u) + lambda * l2_norm_sq(u);
}

/// int F(x, u(x)) dx with the lumped mass. When `x_aware` is false, F is evaluated at x = 0.
inline double composite_integral(const DiscreteFunction& u, const NonlinearitySpec& F, bool x_aware = true) {
  const auto& g = *u.grid();
  const auto& m = g.mass();
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (u[i] == 0.0) continue;
    acc += m[i] * F.F(x_aware ? g.node(i) : 0.0, u[i]);
  }
  return acc;
}

/// int f(x, u) u dx.
inline double composite_fu_u(const DiscreteFunction& u, const NonlinearitySpec& F) {
  const auto& g = *u.grid();
  const auto& m = g.mass();
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (u[i] != 0.0) acc += m[i] * F.f(g.node(i), u[i]) * u[i];
  return acc;
}

// ---------------------------------------------------------------------------
// Operator -Delta + lambda and its inverse
// ---------------------------------------------------------------------------

/// Stiffness matrix-vector product A u (pinned rows zero).
inline std::vector<double> stiffness_apply(const Grid& g, const std::vector<double>& u) {
  const auto& c = g.stiffness();
  std::vector<double> out(u.size(), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double flux = c[i] * (u[i] - u[i + 1]);
    out[i] += flux;
    out[i + 1] -= flux;
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    if (g.pinned(i)) out[i] = 0.0;
  return out;
}

/// (A u) / m + lambda u: the discrete -Delta + lambda, symmetric in the lumped L2 product,
/// so that <apply_operator(u, 0), u>_{L2} equals the Dirichlet seminorm exactly.
inline DiscreteFunction apply_operator(const DiscreteFunction& u, double lambda) {
  const auto& g = *u.grid();
  auto au = stiffness_apply(g, u.values());
  for (std::size_t i = 0; i < au.size(); ++i) au[i] = g.pinned(i) ? 0.0 : au[i] / g.mass()[i] + lambda * u[i];
  return {u.grid(), std::move(au)};
}

namespace detail {
// Tridiagonal entries of A + lambda M on free nodes (diag d, off-diagonal e between i and i+1).
inline void shifted_tridiagonal(const Grid& g, double lambda, std::vector<double>& d, std::vector<double>& e) {
  const auto& c = g.stiffness();
  const auto n = g.size();
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    d[i] += c[i];
    d[i + 1] += c[i];
    e[i] = -c[i];
  }
  for (std::size_t i = 0; i < n; ++i) d[i] += lambda * g.mass()[i];
}
}  // namespace detail

/// Number of negative pivots of A + lambda M (Sylvester inertia on free nodes):
/// equals the count of discrete Dirichlet eigenvalues below -lambda.
inline std::size_t negative_pivots(const Grid& g, double lambda) {
  std::vector<double> d, e;
  detail::shifted_tridiagonal(g, lambda, d, e);
  std::size_t neg = 0;
  double prev = 0.0;
  bool have_prev = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.pinned(i)) { have_prev = false; continue; }
    double piv = d[i];
    if (have_prev) piv -= e[i - 1] * e[i - 1] / prev;
    if (piv == 0.0) piv = -1e-300;
    if (piv < 0.0) ++neg;
    prev = piv;
    have_prev = true;
  }
  return neg;
}

/// Lowest eigenvalue of the discrete Dirichlet problem A u = mu M u, by inertia bisection.
inline double lowest_dirichlet_eigenvalue(const Grid& g) {
  double lo = 0.0, hi = 1.0;
  while (negative_pivots(g, -hi) == 0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (negative_pivots(g, -mid) == 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Solves (A + lambda M) x = rhs on free nodes (Thomas algorithm); pinned entries of x are zero.
/// Requires A + lambda M positive definite.
inline std::vector<double> solve_shifted(const Grid& g, double lambda, const std::vector<double>& rhs) {
  std::vector<double> d, e;
  detail::shifted_tridiagonal(g, lambda, d, e);
  const auto n = g.size();
  std::vector<double> cp(n, 0.0), dp(n, 0.0), x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (g.pinned(i)) continue;
    const bool link = i > 0 && !g.pinned(i - 1);
    const double denom = d[i] - (link ? e[i - 1] * cp[i - 1] : 0.0);
    if (!(denom > 0.0)) throw InvalidArgument("solve_shifted: operator is not positive definite");
    cp[i] = (i + 1 < n && !g.pinned(i + 1)) ? e[i] / denom : 0.0;
    dp[i] = (rhs[i] - (link ? e[i - 1] * dp[i - 1] : 0.0)) / denom;
  }
  for (std::size_t k = n; k-- > 0;) {
    if (g.pinned(k)) continue;
    x[k] = dp[k] - ((k + 1 < n && !g.pinned(k + 1)) ? cp[k] * x[k + 1] : 0.0);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Group actions
// ---------------------------------------------------------------------------

namespace detail {
// Two modes.
// Cubic (continuous dilations): on radial grids the Dirichlet condition at R is
// re-imposed by subtracting the resampled boundary value from every node; a
// constant shift leaves the Dirichlet form unchanged, whereas pinning the last
// node alone would add a jump there.
// Linear (the discrete group action): the P1 interpolant, zero beyond the grid.
// This map is linear in u and round-trips concentrate/spread pairs to rounding
// because the truncated tail matches the pinned tail of the original.
inline DiscreteFunction resample(const DiscreteFunction& u, const std::vector<double>& at, double scale,
                                 bool piecewise_linear = false) {
  const auto& g = *u.grid();
  std::vector<double> v(at.size());
  if (piecewise_linear) {
    const auto& x = g.nodes();
    for (std::size_t i = 0; i < at.size(); ++i) {
      const double r = at[i];
      if (r < x.front() || r > x.back()) continue;
      auto hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), r) - x.begin());
      if (hi >= x.size()) hi = x.size() - 1;
      const std::size_t lo = hi - 1;
      const double s = (r - x[lo]) / (x[hi] - x[lo]);
      v[i] = scale * ((1.0 - s) * u[lo] + s * u[hi]);
    }
  } else {
    MonotoneCubic interp(g.nodes(), u.values(), 0.0);
    for (std::size_t i = 0; i < at.size(); ++i) v[i] = scale * interp(at[i]);
  }
  if (!g.is_line() && !piecewise_linear) {
    const double edge = v.back();
    for (double& x : v) x -= edge;
  }
  return {u.grid(), std::move(v)};
}
}  // namespace detail

/// u(. / t), resampled by monotone cubic interpolation; zero beyond the grid.
inline DiscreteFunction dilate(const DiscreteFunction& u, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("dilate: t must be positive");
  if (t == 1.0) return u;
  std::vector<double> at(u.size());
  for (std::size_t i = 0; i < at.size(); ++i) at[i] = u.grid()->node(i) / t;
  return detail::resample(u, at, 1.0);
}

/// gamma^{(N-2)j/2} u(gamma^j .): norm-preserving discrete dilation. Uses the P1
/// interpolant, so the map is linear in u.
inline DiscreteFunction unitary_dilate(const DiscreteFunction& u, int j, double gamma = 2.0) {
  if (!(gamma > 1.0)) throw InvalidArgument("unitary_dilate: gamma must exceed 1");
  if (u.grid()->is_line()) throw InvalidArgument("unitary_dilate: radial grids only");
  if (j == 0) return u;
  const int N = u.grid()->dim();
  std::vector<double> at(u.size());
  const double t = std::pow(gamma, j);
  for (std::size_t i = 0; i < at.size(); ++i) at[i] = u.grid()->node(i) * t;
  return detail::resample(u, at, std::pow(gamma, 0.5 * (N - 2) * j), true);
}

/// u(. - y) on a line grid; exact index shift when y is a multiple of h.
inline DiscreteFunction translate(const DiscreteFunction& u, double y) {
  const auto& g = *u.grid();
  if (!g.is_line()) throw InvalidArgument("translate: line grids only");
  if (!(std::abs(y) < 2.0 * g.extent())) throw InvalidArgument("translate: |y| must be below 2L");
  if (y == 0.0) return u;
  const double k = y / g.h();
  const double kr = std::round(k);
  if (std::abs(k - kr) < 1e-9) {
    const auto shift = static_cast<long>(kr);
    const auto n = static_cast<long>(u.size());
    std::vector<double> v(u.size(), 0.0);
    for (long i = 0; i < n; ++i) {
      const long src = i - shift;
      if (src >= 0 && src < n) v[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(src)];
    }
    return {u.grid(), std::move(v)};
  }
  std::vector<double> at(u.size());
  for (std::size_t i = 0; i < at.size(); ++i) at[i] = g.node(i) - y;
  return detail::resample(u, at, 1.0);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Writes "# <grid metadata>", a "node,value" header and one row per node.
inline void write_csv(const DiscreteFunction& u, std::ostream& os) {
  os << "# " << u.grid()->metadata() << "\n" << "node,value\n";
  char buf[64];
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", u.grid()->node(i), u[i]);
    os << buf;
  }
}

inline void write_csv(const DiscreteFunction& u, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_csv(u, os);
}

/// Parses the metadata line written by Grid::metadata().
inline GridPtr grid_from_metadata(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto need = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw InvalidArgument("grid metadata: missing " + k);
    return it->second;
  };
  if (need("kind") == "line") {
    const double L = std::stod(need("L"));
    const double cells = std::stod(need("cells"));
    return Grid::line(L, 2.0 * L / cells);
  }
  const std::string sp = need("spacing"), dom = need("domain");
  if (sp != "uniform" && sp != "geometric") throw InvalidArgument("grid metadata: bad spacing " + sp);
  if (dom != "whole_space" && dom != "ball") throw InvalidArgument("grid metadata: bad domain " + dom);
  return Grid::radial(std::stoi(need("N")), std::stod(need("R")), std::stoul(need("M")),
                      sp == "uniform" ? Spacing::uniform : Spacing::geometric,
                      dom == "ball" ? DomainKind::ball : DomainKind::whole_space,
                      sp == "geometric" ? std::stod(need("stretch")) : 10.0);
}

/// Reads a profile written by write_csv. The grid is rebuilt from the metadata line
/// and checked against the listed nodes.
inline DiscreteFunction read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("#", 0) != 0) throw InvalidArgument("read_csv: missing metadata line");
  auto grid = grid_from_metadata(line.substr(1));
  if (!std::getline(is, line)) throw InvalidArgument("read_csv: missing column header");
  std::vector<double> v;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidArgument("read_csv: malformed row " + std::to_string(row + 3));
    const double x = std::stod(line.substr(0, comma));
    if (row >= grid->size() || std::abs(x - grid->node(row)) > 1e-9 * std::max(1.0, std::abs(x)))
      throw InvalidArgument("read_csv: node mismatch at row " + std::to_string(row + 3));
    v.push_back(std::stod(line.substr(comma + 1)));
    ++row;
  }
  if (v.size() != grid->size()) throw InvalidArgument("read_csv: row count does not match grid");
  return {grid, std::move(v)};
}

inline DiscreteFunction read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  return read_csv(is);
}

}  // namespace ccmp
