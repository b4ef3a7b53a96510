#include <cmath>

#include <gtest/gtest.h>

#include "ccmp/profile_decomposition.hpp"
#include "ccmp/sphere_maximizer.hpp"

using namespace ccmp;

namespace {

GridPtr radial4() {
  static const auto g = Grid::radial(4, 1000.0, 4000, Spacing::geometric, DomainKind::whole_space, 18.0);
  return g;
}

double rel_err(const DiscreteFunction& a, const DiscreteFunction& b, double lambda) {
  return std::sqrt(detail::space_norm_sq(a - b, lambda) / detail::space_norm_sq(b, lambda));
}

struct LineCase {
  GridPtr g;
  DiscreteFunction w;
  std::vector<DiscreteFunction> seq;
};

// u_k = sech(x - shift) + 0.8 sech(x - shift - y_k), y_k = 1.5 k - 2.
LineCase line_case(double shift) {
  auto g = Grid::line(40.0, 0.05);
  auto w = DiscreteFunction::sample(g, [shift](double x) { return 1.0 / std::cosh(x - shift); });
  auto wi = DiscreteFunction::sample(g, [shift](double x) { return 0.8 / std::cosh(x - shift); });
  BumpSchedule b{wi, {}, {}};
  for (int k = 0; k < 16; ++k) b.y.push_back(1.5 * k - 2.0);
  auto seq = synth_multibump(w, {b}, 16);
  return {g, w, seq};
}

}  // namespace

TEST(ProfileDecomposition, ConstantSequenceIsOneProfile) {
  auto w = talenti_bump(radial4(), 1.0);
  std::vector<DiscreteFunction> seq(10, w);
  const auto dec = decompose(seq, 2.0);
  ASSERT_EQ(dec.items.size(), 1u);
  EXPECT_EQ(dec.items[0].cls, ProfileClass::N0);
  EXPECT_LT(rel_err(dec.items[0].w, w, 1.0), 1e-6);
  EXPECT_LT(dec.remainder.back(), 1e-6);
  EXPECT_TRUE(verify_decomposition(seq, dec).norms_ok);
}

TEST(ProfileDecomposition, PlantedConcentratingBump) {
  auto w = talenti_bump(radial4(), 1.0);
  BumpSchedule b{w * 0.8, {}, {}};
  for (int k = 0; k < 16; ++k) b.j.push_back(k);
  const auto seq = synth_multibump(w, {b}, 16);
  const auto dec = decompose(seq, 2.0);
  ASSERT_EQ(dec.items.size(), 2u);
  EXPECT_EQ(dec.items[0].cls, ProfileClass::N0);
  EXPECT_EQ(dec.items[1].cls, ProfileClass::Nplus);
  EXPECT_GT(dec.items[1].j_slope, 0.9);
  for (int k = 4; k < 16; ++k) EXPECT_EQ(dec.items[1].j[k], k);  // earlier members still overlap
  EXPECT_LT(rel_err(dec.items[0].w, w, 1.0), 0.05);
  EXPECT_LT(rel_err(dec.items[1].w, w * 0.8, 1.0), 0.05);
  const auto chk = verify_decomposition(seq, dec);
  EXPECT_TRUE(chk.norms_ok && chk.separation_ok && chk.remainder_ok);
  EXPECT_NEAR(chk.norm_ratio, 1.0, 0.03);
  const auto split = energy_split(NonlinearitySpec::critical_stem(4), seq, dec);
  EXPECT_LT(split.gap, 0.05);
}

TEST(ProfileDecomposition, TranslatingBumpOnLine) {
  const auto c = line_case(0.0);
  DecomposeOptions o;
  o.lambda = 1.0;
  const auto dec = decompose(c.seq, 2.0, o);
  ASSERT_EQ(dec.items.size(), 2u);
  EXPECT_FALSE(dec.items[0].escapes);
  EXPECT_TRUE(dec.items[1].escapes);
  for (int k = 4; k < 16; ++k) EXPECT_NEAR(dec.items[1].y[k], 1.5 * k - 2.0, 1e-9);
  EXPECT_LT(rel_err(dec.items[0].w, c.w, 1.0), 0.01);
  EXPECT_LT(rel_err(dec.items[1].w, c.w * 0.8, 1.0), 0.01);
  EXPECT_LT(dec.remainder.back(), 0.01);
}

// Translating every member of the sequence translates the bounded profile and leaves
// counts, classes and profile norms unchanged.
TEST(ProfileDecomposition, TranslationEquivariance) {
  DecomposeOptions o;
  o.lambda = 1.0;
  const auto a = decompose(line_case(0.0).seq, 2.0, o);
  const auto shifted = line_case(1.0);
  const auto b = decompose(shifted.seq, 2.0, o);
  ASSERT_EQ(a.items.size(), b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    EXPECT_EQ(a.items[i].cls, b.items[i].cls);
    EXPECT_EQ(a.items[i].escapes, b.items[i].escapes);
    EXPECT_NEAR(a.items[i].norm_sq, b.items[i].norm_sq, 1e-2 * a.items[i].norm_sq);
  }
  const auto moved = translate(a.items[0].w, 1.0);
  EXPECT_LT(rel_err(moved, b.items[0].w, 1.0), 1e-2);
}

// Two items that ride the same schedule are not orthogonal.
TEST(ProfileDecomposition, MergedScheduleFailsSeparation) {
  auto w = talenti_bump(radial4(), 1.0);
  std::vector<DiscreteFunction> seq(12, w);
  Decomposition dec;
  for (int m = 0; m < 2; ++m) {
    ProfileItem it{w * 0.5, {}, {}, ProfileClass::Nplus, 0.0, 1.0, 0.0, false};
    for (int k = 0; k < 12; ++k) {
      it.j.push_back(k);
      it.y.push_back(0.0);
    }
    dec.items.push_back(it);
  }
  dec.remainder.assign(12, 0.0);
  EXPECT_FALSE(verify_decomposition(seq, dec).separation_ok);
  dec.items[1].j.assign(12, 0);
  EXPECT_TRUE(verify_decomposition(seq, dec).separation_ok);
}

TEST(ProfileDecomposition, RejectsShortSequences) {
  auto w = talenti_bump(radial4(), 1.0);
  EXPECT_THROW(decompose(std::vector<DiscreteFunction>(5, w), 2.0), InvalidArgument);
  EXPECT_THROW(decompose(std::vector<DiscreteFunction>(10, w), 1.0), InvalidArgument);
}

TEST(ProfileDecomposition, ScheduleLeavingResolutionWindowIsReported) {
  auto coarse = Grid::radial(4, 20.0, 200, Spacing::geometric, DomainKind::whole_space, 6.0);
  auto w = talenti_bump(coarse, 1.0);
  BumpSchedule b{w, {}, {}};
  for (int k = 0; k < 10; ++k) b.j.push_back(3 * k);
  EXPECT_THROW(synth_multibump(w, {b}, 10), OutOfRange);
}
