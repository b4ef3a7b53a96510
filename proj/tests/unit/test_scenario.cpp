#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "ccmp/scenario.hpp"

using namespace ccmp;

namespace {

const std::string kMinimal = R"([scenario]
name = tiny
regime = subcritical_H1
lambda = 1
mu = 4

[grid]
N = 1
L = 10
h = 0.05

[nonlinearity]
kind = power
p = 4
)";

std::size_t error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return 0;
}

std::string error_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::filesystem::path scenario_dir() { return std::filesystem::path(CCMP_SOURCE_DIR) / "scenarios"; }

}  // namespace

TEST(Config, RoundTripOfEveryShippedScenario) {
  std::size_t count = 0;
  for (const auto& e : std::filesystem::directory_iterator(scenario_dir())) {
    if (e.path().extension() != ".cfg") continue;
    const auto cfg = load_config(e.path().string());
    const auto text = emit_config(cfg);
    EXPECT_EQ(parse_config(text), cfg) << e.path();
    EXPECT_EQ(emit_config(parse_config(text)), text) << e.path();
    ++count;
  }
  EXPECT_EQ(count, 7u);
}

TEST(Config, MinimalDefaults) {
  const auto cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.name, "tiny");
  EXPECT_EQ(cfg.grid.N, 1);
  EXPECT_EQ(cfg.output.dir, "out");
  EXPECT_TRUE(std::isnan(cfg.verify.expect_c));
  EXPECT_NO_THROW(build_grid(cfg));
  EXPECT_EQ(build_nonlinearity(cfg).kind(), NonlinearityKind::power);
}

TEST(Config, UnknownKeyReportsLine) {
  const auto text = kMinimal + "bogus = 3\n";
  EXPECT_EQ(error_line(text), 15u);
  EXPECT_NE(error_message(text).find("bogus"), std::string::npos);
}

TEST(Config, MissingDimensionNamesTheKey) {
  std::string text = kMinimal;
  text.erase(text.find("N = 1\n"), 6);
  EXPECT_NE(error_message(text).find("'N'"), std::string::npos);
}

TEST(Config, RegimeConsistency) {
  auto with = [](const std::string& from, const std::string& to) {
    std::string t = kMinimal;
    t.replace(t.find(from), from.size(), to);
    return t;
  };
  EXPECT_EQ(error_line(with("lambda = 1", "lambda = -1")), 4u);
  EXPECT_THROW(parse_config(with("regime = subcritical_H1", "regime = critical_D12")), ConfigError);
  EXPECT_THROW(parse_config(with("mu = 4", "mu = 2")), ConfigError);
  EXPECT_THROW(parse_config(with("N = 1", "N = 2")), ConfigError);
  EXPECT_THROW(parse_config(with("p = 4", "p = four")), ConfigError);
  EXPECT_THROW(parse_config(kMinimal + "[grid]\n"), ConfigError);
  EXPECT_THROW(parse_config(kMinimal + "p = 5\n"), ConfigError);
  EXPECT_THROW(parse_config(with("kind = power", "kind = cubic")), ConfigError);
}

TEST(Config, NestedNonlinearity) {
  std::string text = kMinimal;
  text.replace(text.find("kind = power\np = 4"), 18,
               "kind = sum\nterm1.weight = 1\nterm1.kind = power\nterm1.p = 4\n"
               "term2.weight = 0.5\nterm2.kind = modulation\nterm2.amplitude = 0.5\n"
               "term2.base.kind = power\nterm2.base.p = 3");
  const auto cfg = parse_config(text);
  const auto F = build_nonlinearity(cfg);
  EXPECT_EQ(F.kind(), NonlinearityKind::sum);
  const double expect = 0.25 * 16.0 + 0.5 * 1.5 * 8.0 / 3.0;
  EXPECT_NEAR(F.F(0.0, 2.0), expect, 1e-12);
  EXPECT_EQ(parse_config(emit_config(cfg)), cfg);
}

// Same seed, same report body; timing is the only field allowed to differ.
TEST(Scenario, DeterministicUnderFixedSeed) {
  auto cfg = load_config((scenario_dir() / "S1_soliton.cfg").string());
  auto a = report_json(run_scenario(cfg));
  auto b = report_json(run_scenario(cfg));
  a.erase("timing");
  b.erase("timing");
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a["exit_code"], 0);
  EXPECT_EQ(a["schema_version"], kReportSchemaVersion);
}

TEST(Scenario, ExpectationMismatchIsVerificationFailure) {
  auto cfg = load_config((scenario_dir() / "S1_soliton.cfg").string());
  cfg.verify.expect_c = 1.0;
  const auto rep = run_scenario(cfg);
  ASSERT_TRUE(rep.expectation_ok);
  EXPECT_FALSE(*rep.expectation_ok);
  EXPECT_EQ(rep.exit_code(), exit_verification);
}

TEST(Scenario, NonConvergenceMapsToExitThree) {
  auto cfg = load_config((scenario_dir() / "S1_soliton.cfg").string());
  cfg.solver.max_outer = 1;
  const auto rep = run_scenario(cfg);
  EXPECT_EQ(rep.exit_code(), exit_nonconvergence);
}

TEST(Scenario, EmitWritesBundleAtomically) {
  auto cfg = load_config((scenario_dir() / "S1_soliton.cfg").string());
  const auto rep = run_scenario(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "ccmp_emit_test";
  std::filesystem::remove_all(dir);
  const auto files = emit_report(rep, dir.string(), ReportFormat::csv_bundle);
  EXPECT_GE(files.size(), 2u);
  for (const auto& f : files) {
    EXPECT_TRUE(std::filesystem::exists(f));
    EXPECT_FALSE(std::filesystem::exists(f.string() + ".tmp"));
  }
  std::ifstream is(dir / "S1_soliton.json");
  const auto j = json::parse(is);
  EXPECT_EQ(j["scenario"], "S1_soliton");
  std::filesystem::remove_all(dir);
}
