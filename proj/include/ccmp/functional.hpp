#pragma once
//
// Energy G(u) = 1/2 |u|^2 - int F(x, u), with |u|^2 = int |u'|^2 + lambda |u|^2
// in the regime's norm, plus its gradient and the Pohozaev/Nehari diagnostics.
//

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ccmp/error.hpp"
#include "ccmp/function_space.hpp"
#include "ccmp/nonlinearity.hpp"

namespace ccmp {

enum class Regime { critical_D12, subcritical_H1, ball_domain };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::critical_D12: return "critical_D12";
    case Regime::subcritical_H1: return "subcritical_H1";
    case Regime::ball_domain: return "ball_domain";
  }
  return "?";
}

class EnergyFunctional {
 public:
  /// critical_D12: radial whole-space grid, lambda = 0.
  /// subcritical_H1: radial or line grid, lambda > 0.
  /// ball_domain: radial ball grid, lambda above minus the first Dirichlet eigenvalue.
  EnergyFunctional(GridPtr grid, double lambda, NonlinearitySpec spec, Regime regime)
      : grid_(std::move(grid)), lambda_(lambda), spec_(std::move(spec)), regime_(regime) {
    if (!grid_) throw InvalidArgument("EnergyFunctional: null grid");
    if (!std::isfinite(lambda_)) throw InvalidArgument("EnergyFunctional: lambda must be finite");
    if (spec_.dim() != grid_->dim()) throw InvalidArgument("EnergyFunctional: nonlinearity and grid disagree on N");
    switch (regime_) {
      case Regime::critical_D12:
        if (grid_->is_line()) throw InvalidArgument("critical_D12 requires a radial grid");
        if (lambda_ != 0.0) throw InvalidArgument("critical_D12 is the zero mass case: lambda must be 0");
        break;
      case Regime::subcritical_H1:
        if (!(lambda_ > 0.0)) throw InvalidArgument("subcritical_H1 requires lambda > 0");
        break;
      case Regime::ball_domain:
        if (grid_->domain() != DomainKind::ball) throw InvalidArgument("ball_domain requires a ball grid");
        if (negative_pivots(*grid_, lambda_) != 0)
          throw InvalidArgument("ball_domain requires lambda > -lambda_1 (operator not positive definite)");
        break;
    }
  }

  const GridPtr& grid() const { return grid_; }
  double lambda() const { return lambda_; }
  const NonlinearitySpec& spec() const { return spec_; }
  Regime regime() const { return regime_; }
  int dim() const { return grid_->dim(); }

  /// int |u'|^2 + lambda |u|^2 (the Dirichlet seminorm when lambda = 0).
  double norm_sq(const DiscreteFunction& u) const {
    return dirichlet_seminorm_sq(u) + (lambda_ != 0.0 ? lambda_ * l2_norm_sq(u) : 0.0);
  }
  double psi(const DiscreteFunction& u) const { return composite_integral(u, spec_); }

  /// Same regime and grid with another nonlinearity (the asymptotic problems).
  EnergyFunctional with_spec(NonlinearitySpec spec) const { return {grid_, lambda_, std::move(spec), regime_}; }

 private:
  GridPtr grid_;
  double lambda_;
  NonlinearitySpec spec_;
  Regime regime_;
};

inline double energy(const EnergyFunctional& G, const DiscreteFunction& u) {
  return 0.5 * G.norm_sq(u) - G.psi(u);
}

struct GradientResidual {
  DiscreteFunction residual;  // (-Delta + lambda) u - f(x, u), nodal
  DiscreteFunction riesz;     // representer of G'(u) in the energy inner product
  double dual_norm;           // |G'(u)| in the dual of the energy space
};

/// Nodal gradient A u + lambda M u - M f(u): its dot product with v is the exact
/// directional derivative of the discrete energy.
inline std::vector<double> energy_gradient(const EnergyFunctional& G, const DiscreteFunction& u) {
  const auto& g = *G.grid();
  auto out = stiffness_apply(g, u.values());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (g.pinned(i)) { out[i] = 0.0; continue; }
    const double fu = u[i] == 0.0 ? 0.0 : G.spec().f(g.node(i), u[i]);
    out[i] += g.mass()[i] * (G.lambda() * u[i] - fu);
  }
  return out;
}

inline GradientResidual gradient_residual(const EnergyFunctional& G, const DiscreteFunction& u) {
  const auto& g = *G.grid();
  auto grad = energy_gradient(G, u);
  auto rz = solve_shifted(g, G.lambda(), grad);
  double dual = 0.0;
  std::vector<double> r(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    dual += grad[i] * rz[i];
    r[i] = g.pinned(i) ? 0.0 : grad[i] / g.mass()[i];
  }
  return {DiscreteFunction(G.grid(), std::move(r)), DiscreteFunction(G.grid(), std::move(rz)),
          std::sqrt(std::max(0.0, dual))};
}

namespace detail {
inline void require_dilation_path(const EnergyFunctional& G) {
  if (G.regime() != Regime::critical_D12) throw InvalidArgument("dilation path requires the critical_D12 regime");
  if (!G.spec().autonomous()) throw InvalidArgument("dilation path requires an autonomous nonlinearity");
}
}  // namespace detail

/// G(u(. / t)) = 1/2 t^{N-2} a - t^N b with a = |u|^2, b = psi(u).
inline double dilation_path_energy(const EnergyFunctional& G, const DiscreteFunction& u, double t) {
  detail::require_dilation_path(G);
  if (!(t >= 0.0)) throw InvalidArgument("dilation_path_energy: t must be nonnegative");
  if (t == 0.0) return 0.0;
  const int N = G.dim();
  return 0.5 * std::pow(t, N - 2) * dirichlet_seminorm_sq(u) - std::pow(t, N) * G.psi(u);
}

struct PathMax {
  double t_star;
  double value;
};

/// Maximum of the dilation-path energy: t* = ((N-2) a / (2 N b))^{1/2}.
inline PathMax path_max(const EnergyFunctional& G, const DiscreteFunction& u) {
  detail::require_dilation_path(G);
  const int N = G.dim();
  const double a = dirichlet_seminorm_sq(u), b = G.psi(u);
  if (!(b > 0.0)) throw NoMountainError("path_max: psi(u) <= 0, the dilation path has no mountain");
  const double t = std::sqrt((N - 2) * a / (2.0 * N * b));
  return {t, 0.5 * std::pow(t, N - 2) * a - std::pow(t, N) * b};
}

struct PohozaevResidual {
  double absolute;          // (N-2)/2 |u'|^2 + N/2 lambda |u|_2^2 - N int F
  double relative;          // absolute / (N/2 (|u'|^2 + lambda |u|_2^2 + |int F|))
  double printed_absolute;  // |u'|^2 - 2* int (F - lambda u^2), N >= 3 only (NaN otherwise)
  double printed_relative;
};

/// Pohozaev identity for decaying solutions of -Delta u + lambda u = f(u).
inline PohozaevResidual pohozaev_residual(const EnergyFunctional& G, const DiscreteFunction& u) {
  if (!G.spec().autonomous()) throw InvalidArgument("pohozaev_residual requires an autonomous nonlinearity");
  const int N = G.dim();
  const double a = dirichlet_seminorm_sq(u), m = l2_norm_sq(u), b = G.psi(u), lam = G.lambda();
  const double scale = 0.5 * N * (a + std::abs(lam) * m + std::abs(b));
  PohozaevResidual out{};
  out.absolute = std::abs(0.5 * (N - 2) * a + 0.5 * N * lam * m - N * b);
  out.relative = scale > 0.0 ? out.absolute / scale : 0.0;
  if (N >= 3) {
    out.printed_absolute = std::abs(a - critical_exponent(N) * (b - lam * m));
    out.printed_relative = scale > 0.0 ? out.printed_absolute / scale : 0.0;
  } else {
    out.printed_absolute = out.printed_relative = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

/// <G'(u), u> = |u|^2 - int f(x, u) u.
inline double nehari_residual(const EnergyFunctional& G, const DiscreteFunction& u) {
  return G.norm_sq(u) - composite_fu_u(u, G.spec());
}

}  // namespace ccmp
