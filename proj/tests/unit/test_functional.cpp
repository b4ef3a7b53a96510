#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ccmp/functional.hpp"
#include "oracles.hpp"

using namespace ccmp;

namespace {

DiscreteFunction random_bump(const GridPtr& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  std::vector<double> v(g->size(), 0.0);
  for (int k = 0; k < 3; ++k) {
    const double a = n(rng), c = g->is_line() ? 2.0 * n(rng) : 0.0, w = 0.5 + std::abs(n(rng));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += a * std::exp(-std::pow((g->node(i) - c) / w, 2));
  }
  return {g, std::move(v)};
}

// Central difference with Richardson extrapolation against the assembled gradient.
double fd_mismatch(const EnergyFunctional& G, const DiscreteFunction& u, const DiscreteFunction& v) {
  auto d = [&](double h) { return (energy(G, u + v * h) - energy(G, u - v * h)) / (2.0 * h); };
  const double h = 1e-3;
  const double fd = (4.0 * d(0.5 * h) - d(h)) / 3.0;
  const auto grad = energy_gradient(G, u);
  double an = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) an += grad[i] * v[i];
  return std::abs(fd - an) / std::max(std::abs(an), 1e-300);
}

}  // namespace

TEST(Functional, RegimeValidation) {
  auto whole = Grid::radial(4, 10.0, 100);
  auto ball = Grid::radial(4, 1.0, 100, Spacing::uniform, DomainKind::ball);
  const auto F = NonlinearitySpec::critical_stem(4);
  EXPECT_THROW(EnergyFunctional(whole, 1.0, F, Regime::critical_D12), InvalidArgument);
  EXPECT_THROW(EnergyFunctional(whole, -1.0, F, Regime::subcritical_H1), InvalidArgument);
  EXPECT_THROW(EnergyFunctional(whole, 0.0, F, Regime::ball_domain), InvalidArgument);
  const double l1 = lowest_dirichlet_eigenvalue(*ball);
  EXPECT_NO_THROW(EnergyFunctional(ball, -0.5 * l1, F, Regime::ball_domain));
  EXPECT_THROW(EnergyFunctional(ball, -1.1 * l1, F, Regime::ball_domain), InvalidArgument);
  EXPECT_THROW(EnergyFunctional(Grid::line(5.0, 0.05), 1.0, F, Regime::subcritical_H1), InvalidArgument);
}

TEST(Functional, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(11);
  struct Case {
    GridPtr g;
    double lambda;
    NonlinearitySpec F;
    Regime r;
  };
  auto ball = Grid::radial(4, 1.0, 400, Spacing::uniform, DomainKind::ball);
  std::vector<Case> cases{
      {Grid::line(10.0, 0.02), 1.0, NonlinearitySpec::power(1, 4.0), Regime::subcritical_H1},
      {Grid::line(10.0, 0.02), 1.0,
       NonlinearitySpec::spatial_modulation(NonlinearitySpec::power(1, 4.0), Envelope{0.5, 1.0}),
       Regime::subcritical_H1},
      {Grid::radial(3, 20.0, 800), 1.0, NonlinearitySpec::power(3, 4.0), Regime::subcritical_H1},
      {Grid::radial(4, 50.0, 800, Spacing::geometric, DomainKind::whole_space, 10.0), 0.0,
       NonlinearitySpec::oscillating_stem(4, 0.2, 2.0), Regime::critical_D12},
      {ball, -0.3 * lowest_dirichlet_eigenvalue(*ball), NonlinearitySpec::critical_stem(4), Regime::ball_domain},
  };
  for (const auto& c : cases) {
    EnergyFunctional G(c.g, c.lambda, c.F, c.r);
    for (int rep = 0; rep < 3; ++rep) {
      auto u = random_bump(c.g, rng), v = random_bump(c.g, rng);
      EXPECT_LT(fd_mismatch(G, u, v), 1e-6) << c.F.describe();
    }
  }
}

// The exact soliton of -u'' + u = u^3 sits at level 4/3 with vanishing Pohozaev and
// Nehari residuals, up to discretization error.
TEST(Functional, SolitonOracle) {
  auto g = Grid::line(20.0, 0.01);
  EnergyFunctional G(g, 1.0, NonlinearitySpec::power(1, 4.0), Regime::subcritical_H1);
  auto u = DiscreteFunction::sample(g, oracle::soliton);
  EXPECT_NEAR(energy(G, u), oracle::soliton_level, 1e-4);
  EXPECT_LT(pohozaev_residual(G, u).relative, 1e-4);
  EXPECT_LT(std::abs(nehari_residual(G, u)) / G.norm_sq(u), 1e-4);
  EXPECT_LT(gradient_residual(G, u).dual_norm, 1e-3 * std::sqrt(G.norm_sq(u)));
}

TEST(Functional, DilationPathMatchesResampledEnergy) {
  auto g = Grid::radial(4, 400.0, 4000, Spacing::geometric, DomainKind::whole_space, 14.0);
  EnergyFunctional G(g, 0.0, NonlinearitySpec::critical_stem(4), Regime::critical_D12);
  auto u = DiscreteFunction::sample(g, [](double r) { return 0.3 * std::exp(-r * r); });
  for (double t : {0.5, 1.5, 3.0}) {
    const double path = dilation_path_energy(G, u, t);
    EXPECT_NEAR(energy(G, dilate(u, t)), path, 1e-2 * std::abs(path));
  }
  EXPECT_EQ(dilation_path_energy(G, u, 0.0), 0.0);
}

TEST(Functional, PathMaxIsTheMaximumOfTheDilationPath) {
  auto g = Grid::radial(4, 100.0, 1000, Spacing::geometric, DomainKind::whole_space, 10.0);
  EnergyFunctional G(g, 0.0, NonlinearitySpec::oscillating_stem(4, 0.2, 2.0), Regime::critical_D12);
  auto u = DiscreteFunction::sample(g, [](double r) { return 0.4 / (1.0 + r * r); });
  const auto pm = path_max(G, u);
  double best = -INFINITY, at = 0.0;
  for (int i = 1; i <= 20000; ++i) {
    const double t = 5e-4 * i;
    const double e = dilation_path_energy(G, u, t);
    if (e > best) best = e, at = t;
  }
  EXPECT_NEAR(pm.value, best, 1e-6 * best);
  EXPECT_NEAR(pm.t_star, at, 1e-3);
  EnergyFunctional Z(g, 0.0, NonlinearitySpec::zero(4), Regime::critical_D12);
  EXPECT_THROW(path_max(Z, u), NoMountainError);
}

TEST(Functional, DilationPathNeedsAutonomousCriticalSetting) {
  auto g = Grid::radial(3, 10.0, 200);
  EnergyFunctional G(g, 1.0, NonlinearitySpec::power(3, 4.0), Regime::subcritical_H1);
  auto u = DiscreteFunction::sample(g, [](double r) { return std::exp(-r * r); });
  EXPECT_THROW(dilation_path_energy(G, u, 1.0), InvalidArgument);
}
