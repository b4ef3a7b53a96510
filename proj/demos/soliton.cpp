// Mountain-pass descent for -u'' + u = u^3 on [-20, 20]; prints the level and the
// distance of the candidate to sqrt(2) sech(x).

#include <cmath>
#include <cstdio>

#include "ccmp/mountain_pass.hpp"

int main() {
  using namespace ccmp;
  auto grid = Grid::line(20.0, 0.01);
  EnergyFunctional G(grid, 1.0, NonlinearitySpec::power(1, 4.0), Regime::subcritical_H1);
  const auto r = mp_level(G);
  const auto exact = DiscreteFunction::sample(grid, [](double x) { return std::sqrt(2.0) / std::cosh(x); });
  const double err = std::sqrt(l2_norm_sq(*r.candidate - exact) / l2_norm_sq(exact));
  std::printf("c = %.6f (exact 4/3), %d outer steps, relative L2 distance %.2e\n", r.c, r.iters, err);
  return 0;
}
