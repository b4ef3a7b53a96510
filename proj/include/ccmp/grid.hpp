#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ccmp/error.hpp"

namespace ccmp {

enum class Spacing { uniform, geometric };
enum class DomainKind { whole_space, ball, line };

inline const char* to_string(Spacing s) { return s == Spacing::uniform ? "uniform" : "geometric"; }
inline const char* to_string(DomainKind d) {
  switch (d) {
    case DomainKind::whole_space: return "whole_space";
    case DomainKind::ball: return "ball";
    case DomainKind::line: return "line";
  }
  return "?";
}

/// Surface measure of the unit sphere in R^N: 2 pi^{N/2} / Gamma(N/2).
inline double sphere_area(int N) { return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N); }

/// Nodes plus the P1 finite-element data used by every quadrature in the library.
///
/// Radial grids carry nodes 0 = r_0 < ... < r_M = R for functions of |x| in R^N;
/// the Dirichlet form on cell [r_i, r_{i+1}] is integrated exactly for piecewise
/// linear u, giving the cell weight
///     c_i = omega (r_{i+1}^N - r_i^N) / (N h_i^2),
/// and the mass matrix is lumped onto dual cells [e_i, e_{i+1}] with e_i the cell
/// midpoints. Line grids are the N = 1 analogue on [-L, L] (c_i = 1/h, m_i = h).
/// The last node (both ends for line grids) is pinned to zero.
class Grid {
 public:
  static std::shared_ptr<const Grid> radial(int N, double R, std::size_t M, Spacing spacing = Spacing::uniform,
                                            DomainKind domain = DomainKind::whole_space, double stretch = 10.0) {
    if (N < 3) throw InvalidArgument("radial grid requires N >= 3");
    if (!(R > 0.0) || !std::isfinite(R)) throw InvalidArgument("radial grid requires R > 0");
    if (M < 64) throw InvalidArgument("radial grid requires M >= 64");
    if (domain == DomainKind::line) throw InvalidArgument("radial grid domain must be whole_space or ball");
    if (spacing == Spacing::geometric && !(stretch > 0.0)) throw InvalidArgument("geometric stretch must be positive");
    auto g = std::shared_ptr<Grid>(new Grid());
    g->N_ = N;
    g->extent_ = R;
    g->spacing_ = spacing;
    g->domain_ = domain;
    g->stretch_ = spacing == Spacing::geometric ? stretch : 0.0;
    g->x_.resize(M + 1);
    for (std::size_t i = 0; i <= M; ++i) {
      const double s = static_cast<double>(i) / static_cast<double>(M);
      g->x_[i] = spacing == Spacing::uniform ? R * s : R * std::expm1(stretch * s) / std::expm1(stretch);
    }
    g->x_[M] = R;
    for (std::size_t i = 1; i <= M; ++i)
      if (!(g->x_[i] > g->x_[i - 1])) throw InvalidArgument("radial grid nodes not strictly increasing (stretch too large)");
    const double w = sphere_area(N);
    g->cell_.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
      const double a = g->x_[i], b = g->x_[i + 1], h = b - a;
      g->cell_[i] = w * (std::pow(b, N) - std::pow(a, N)) / (N * h * h);
    }
    g->mass_.resize(M + 1);
    for (std::size_t i = 0; i <= M; ++i) {
      const double lo = i == 0 ? 0.0 : 0.5 * (g->x_[i - 1] + g->x_[i]);
      const double hi = i == M ? R : 0.5 * (g->x_[i] + g->x_[i + 1]);
      g->mass_[i] = w * (std::pow(hi, N) - std::pow(lo, N)) / N;
    }
    return g;
  }

  /// Uniform nodes -L, -L + h, ..., L; h is adjusted so that 2L/h is an integer.
  static std::shared_ptr<const Grid> line(double L, double h) {
    if (!(L > 0.0) || !(h > 0.0)) throw InvalidArgument("line grid requires L > 0 and h > 0");
    const auto n = static_cast<std::size_t>(std::llround(2.0 * L / h));
    if (n < 64) throw InvalidArgument("line grid requires at least 64 cells");
    auto g = std::shared_ptr<Grid>(new Grid());
    g->N_ = 1;
    g->extent_ = L;
    g->spacing_ = Spacing::uniform;
    g->domain_ = DomainKind::line;
    const double hh = 2.0 * L / static_cast<double>(n);
    g->x_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g->x_[i] = -L + hh * static_cast<double>(i);
    g->x_[n] = L;
    g->cell_.assign(n, 1.0 / hh);
    g->mass_.assign(n + 1, hh);
    g->mass_.front() = g->mass_.back() = 0.5 * hh;
    return g;
  }

  int dim() const { return N_; }
  bool is_line() const { return domain_ == DomainKind::line; }
  DomainKind domain() const { return domain_; }
  Spacing spacing() const { return spacing_; }
  double stretch() const { return stretch_; }
  /// R for radial grids, L for line grids.
  double extent() const { return extent_; }
  std::size_t size() const { return x_.size(); }
  std::size_t cells() const { return cell_.size(); }
  const std::vector<double>& nodes() const { return x_; }
  double node(std::size_t i) const { return x_[i]; }
  /// Lumped mass (dual-cell measure) of node i.
  const std::vector<double>& mass() const { return mass_; }
  /// Dirichlet-form weight of cell [x_i, x_{i+1}].
  const std::vector<double>& stiffness() const { return cell_; }
  bool pinned(std::size_t i) const { return i + 1 == x_.size() || (is_line() && i == 0); }
  /// Line spacing (first cell width on radial grids).
  double h() const { return x_[1] - x_[0]; }

  /// "kind=radial N=4 R=80 M=2000 spacing=geometric stretch=12 domain=whole_space"
  std::string metadata() const {
    std::ostringstream os;
    os.precision(17);
    if (is_line()) {
      os << "kind=line N=1 L=" << extent_ << " h=" << h() << " cells=" << cells();
    } else {
      os << "kind=radial N=" << N_ << " R=" << extent_ << " M=" << cells() << " spacing=" << to_string(spacing_)
         << " stretch=" << stretch_ << " domain=" << to_string(domain_);
    }
    return os.str();
  }

  bool same_as(const Grid& o) const {
    if (N_ != o.N_ || domain_ != o.domain_ || x_.size() != o.x_.size()) return false;
    for (std::size_t i = 0; i < x_.size(); ++i)
      if (std::abs(x_[i] - o.x_[i]) > 1e-12 * std::max(1.0, std::abs(x_[i]))) return false;
    return true;
  }

 private:
  Grid() = default;

  int N_ = 1;
  double extent_ = 0.0;
  Spacing spacing_ = Spacing::uniform;
  DomainKind domain_ = DomainKind::line;
  double stretch_ = 0.0;
  std::vector<double> x_, cell_, mass_;
};

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace ccmp
