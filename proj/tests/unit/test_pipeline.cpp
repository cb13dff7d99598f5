#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "../support/support.h"
#include "tripcast/config.h"
#include "tripcast/error.h"
#include "tripcast/pipeline.h"

using namespace tripcast;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> quick(const std::string& out) {
  return {"paths.output_dir='" + out + "'", "synth.residents=1500", "synth.days=7",
          "general.workers=4"};
}

}  // namespace

TEST(Config, DefaultsAreValid) {
  const auto c = parse_config("");
  EXPECT_EQ(c.general.year, 2021);
  EXPECT_EQ(c.calibration.range_min, 0.1);
  EXPECT_EQ(c.calibration.range_max, 3.0);
  EXPECT_EQ(c.tripgen.covariates.size(), 9u);
  EXPECT_EQ(c.quality.max_accuracy_m, 50.0);
}

TEST(Config, UnknownKeyAndSectionRejected) {
  try {
    parse_config("[quality]\nmin_binz = 3\n[nonsense]\nx = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("quality.min_binz"), std::string::npos);
    EXPECT_NE(msg.find("nonsense"), std::string::npos);
    EXPECT_EQ(exit_code_for(e), 2);
  }
}

TEST(Config, OverridesBeatFile) {
  const auto c = parse_config("[calibration]\nbeta_step = 0.2\n",
                              {"calibration.beta_step=0.05", "costs.measure=travel_time"});
  EXPECT_DOUBLE_EQ(c.calibration.step, 0.05);
  EXPECT_EQ(c.costs.measure, CostMeasure::kTravelTime);
}

TEST(Config, OutOfRangeValue) {
  EXPECT_THROW(parse_config("[quality]\nmin_bins = 49\n"), ConfigError);
  EXPECT_THROW(parse_config("[general]\ntimezone = \"Not/AZone\"\n"), ConfigError);
  EXPECT_THROW(parse_config("", {"calibration.beta_min=-1"}), ConfigError);
}

TEST(Pipeline, UnknownStage) {
  EXPECT_THROW(run_stage("bogus", parse_config("")), ConfigError);
}

TEST(Pipeline, CalibrateWithoutOdmNamesStage) {
  testing_support::TempDir dir("pipe_missing");
  const auto c = parse_config("", {"paths.output_dir='" + dir.str() + "'"});
  try {
    run_stage("calibrate", c);
    FAIL();
  } catch (const MissingArtifactError& e) {
    EXPECT_EQ(e.stage(), "odm");
    EXPECT_NE(std::string(e.what()).find("odm"), std::string::npos);
    EXPECT_EQ(exit_code_for(e), 3);
  }
}

TEST(Pipeline, FullChainProducesForecastsAndRerunsIdentically) {
  testing_support::TempDir dir("pipe_chain");
  const auto c = parse_config("", quick(dir.str()));
  run_stage("synth", c);
  run_chain(c);
  for (const char* f : {"forecast/forecast.csv", "forecast/growth.csv", "calibrate/gravity_weekday.json",
                        "compare/comparison.csv", "report/report.md", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
  std::map<std::string, std::string> first;
  for (const auto& e : fs::recursive_directory_iterator(dir.path()))
    if (e.is_regular_file()) first[fs::relative(e.path(), dir.path()).string()] = slurp(e.path());
  run_stage("synth", c);
  run_chain(c);
  std::size_t compared = 0;
  for (const auto& [name, bytes] : first) {
    EXPECT_EQ(slurp(dir.path() / name), bytes) << name;
    ++compared;
  }
  EXPECT_GT(compared, 30u);
}

TEST(Pipeline, ManifestRecordsDigests) {
  testing_support::TempDir dir("pipe_manifest");
  const auto c = parse_config("", quick(dir.str()));
  run_stage("synth", c);
  run_stage("ingest", c);
  const auto m = nlohmann::json::parse(slurp(dir.path() / "manifest.json"));
  const auto& outputs = m.at("stages").at("ingest").at("outputs");
  ASSERT_TRUE(outputs.contains("ingest/pings.csv"));
  EXPECT_EQ(outputs.at("ingest/pings.csv").get<std::string>(), sha256_file((dir.path() / "ingest/pings.csv").string()));
}
