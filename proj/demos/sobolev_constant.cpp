// Sphere maximization for F = |s|^4 in N = 4 against the closed-form Sobolev value
// kappa(1) = 3 / (32 pi^2), then the critical point obtained by rescaling.

#include <cmath>
#include <cstdio>
#include <numbers>

#include "ccmp/sphere_maximizer.hpp"

int main() {
  using namespace ccmp;
  auto grid = Grid::radial(4, 200.0, 3000, Spacing::geometric, DomainKind::whole_space, 14.0);
  const auto stem = NonlinearitySpec::critical_stem(4);
  const auto k = kappa_one(stem, grid);
  const double exact = 3.0 / (32.0 * std::numbers::pi * std::numbers::pi);
  std::printf("kappa(1) = %.7f, closed form %.7f, relative gap %.2e\n", k.kappa1, exact,
              std::abs(k.kappa1 - exact) / exact);
  const auto cp = maximizer_to_critical_point(stem, k);
  EnergyFunctional G(grid, 0.0, stem, Regime::critical_D12);
  std::printf("critical level %.5f, path maximum at t = %.4f\n", cp.level, path_max(G, cp.w).t_star);
  return 0;
}
