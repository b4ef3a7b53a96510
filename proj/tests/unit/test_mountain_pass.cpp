#include <cmath>

#include <gtest/gtest.h>

#include "ccmp/mountain_pass.hpp"
#include "oracles.hpp"

using namespace ccmp;

namespace {

// min over integer shifts of |u - soliton(. - y)|_2 / |soliton|_2
double soliton_distance(const DiscreteFunction& u) {
  const auto& g = *u.grid();
  double best = INFINITY;
  for (int s = -200; s <= 200; ++s) {
    const double y = s * g.h();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double ref = oracle::soliton(g.node(i) - y);
      num += g.mass()[i] * std::pow(u[i] - ref, 2);
      den += g.mass()[i] * ref * ref;
    }
    best = std::min(best, std::sqrt(num / den));
  }
  return best;
}

}  // namespace

TEST(MountainPass, InitialPathEndsBelowZero) {
  auto g = Grid::line(20.0, 0.02);
  EnergyFunctional G(g, 1.0, NonlinearitySpec::power(1, 4.0), Regime::subcritical_H1);
  auto seed = DiscreteFunction::sample(g, [](double x) { return std::exp(-0.25 * x * x); });
  auto path = initial_path(G, seed);
  EXPECT_GE(path.size(), 17u);
  EXPECT_EQ(energy(G, path.nodes.front()), 0.0);
  EXPECT_LT(energy(G, path.nodes.back()), 0.0);
  EXPECT_THROW(initial_path(G, seed, 8), InvalidArgument);
}

TEST(MountainPass, SolitonDescent) {
  auto g = Grid::line(20.0, 0.01);
  EnergyFunctional G(g, 1.0, NonlinearitySpec::power(1, 4.0), Regime::subcritical_H1);
  LevelOptions o;
  o.route = LevelRoute::descent;
  const auto lv = mp_level(G, o);
  EXPECT_TRUE(lv.converged);
  EXPECT_EQ(lv.route, "descent");
  EXPECT_NEAR(lv.c, oracle::soliton_level, 1e-2);
  ASSERT_TRUE(lv.candidate);
  EXPECT_LT(soliton_distance(*lv.candidate), 2e-2);
}

TEST(MountainPass, DescentRejectsNonNegativeEndpoint) {
  auto g = Grid::line(20.0, 0.02);
  EnergyFunctional G(g, 1.0, NonlinearitySpec::power(1, 4.0), Regime::subcritical_H1);
  PathPolyline p;
  for (double s : {0.0, 0.01, 0.02}) {
    p.nodes.push_back(DiscreteFunction::sample(g, [s](double x) { return s / std::cosh(x); }));
    p.params.push_back(s);
  }
  EXPECT_THROW(mp_level_descent(G, p), InvalidArgument);
}

TEST(MountainPass, ZeroNonlinearityHasInfiniteLevel) {
  auto g = Grid::radial(4, 10.0, 200);
  EnergyFunctional G(g, 0.0, NonlinearitySpec::zero(4), Regime::critical_D12);
  const auto lv = mp_level(G);
  EXPECT_TRUE(std::isinf(lv.c));
  EXPECT_EQ(lv.route, "zero");
}

// 3D cubic ground state: central value about 4.3374, Pohozaev identity, and agreement
// with the descent level.
TEST(MountainPass, ShootingOracleCubic3D) {
  auto g = Grid::radial(3, 25.0, 2500);
  const auto F = NonlinearitySpec::power(3, 4.0);
  const auto sh = radial_shooting_oracle(3, 1.0, F, {0.5, 20.0}, g);
  EXPECT_NEAR(sh.alpha, 4.3374, 5e-3 * 4.3374);
  EnergyFunctional G(g, 1.0, F, Regime::subcritical_H1);
  EXPECT_LT(pohozaev_residual(G, sh.u).relative, 1e-2);
  EXPECT_NEAR(energy(G, sh.u), sh.level, 1e-2 * sh.level);
  LevelOptions o;
  o.route = LevelRoute::descent;
  const auto lv = mp_level(G, o);
  EXPECT_NEAR(lv.c, sh.level, 2e-2 * sh.level);
  EXPECT_THROW(radial_shooting_oracle(3, 1.0, F, {5.0, 20.0}, g), BracketError);
  EXPECT_THROW(radial_shooting_oracle(3, 0.0, F, {0.5, 20.0}, g), InvalidArgument);
}

// Brezis-Nirenberg: lambda = 0 on a ball does not attain the whole-space level, and a
// negative mass pushes the level strictly below it.
TEST(MountainPass, BallLevelsAgainstWholeSpace) {
  auto ball = Grid::radial(4, 1.0, 1500, Spacing::geometric, DomainKind::ball, 8.0);
  const auto F = NonlinearitySpec::critical_stem(4);
  const double c_plus = 1.0 / (16.0 * oracle::sobolev_kappa(4));
  const double l1 = lowest_dirichlet_eigenvalue(*ball);
  const auto c0 = mp_level(EnergyFunctional(ball, 0.0, F, Regime::ball_domain)).c;
  EXPECT_GE(c0, c_plus * (1.0 - 1e-3));
  EXPECT_LE(c0, c_plus * 1.02);
  const auto c5 = mp_level(EnergyFunctional(ball, -0.5 * l1, F, Regime::ball_domain)).c;
  EXPECT_LT(c5, c_plus * 0.96);
}

TEST(MountainPass, LevelReportVerdicts) {
  auto g = Grid::line(20.0, 0.02);
  const auto base = NonlinearitySpec::power(1, 4.0);
  EnergyFunctional G(g, 1.0, NonlinearitySpec::spatial_modulation(base, Envelope{1.0, 1.0}), Regime::subcritical_H1);
  EnergyFunctional Ginf(g, 1.0, base, Regime::subcritical_H1);
  LevelOptions o;
  o.route = LevelRoute::descent;
  const auto rep = mp_level_report(G, {{"c_inf", Ginf}}, o);
  EXPECT_NEAR(rep.c_sharp.at("c_inf"), oracle::soliton_level, 1e-2);
  EXPECT_TRUE(rep.strict_flags.at("c_inf"));
  EXPECT_TRUE(rep.nonstrict_ok.at("c_inf"));
}
