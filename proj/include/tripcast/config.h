#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "tripcast/homes.h"
#include "tripcast/ingest.h"
#include "tripcast/matrices.h"
#include "tripcast/synth.h"
#include "tripcast/tripdist.h"
#include "tripcast/trips.h"

namespace tripcast {

struct PathsConfig {
  std::string output_dir = "tripcast_out";
  // Empty input paths default to the synth stage outputs.
  std::string pings;
  std::string zones;
  std::string sea;
  std::string population;
};

struct GeneralConfig {
  std::string timezone = "America/Indiana/Indianapolis";
  std::uint64_t seed = 42;
  int workers = 4;
  int year = 2021;  // study year of the ping data and base year of forecasts
};

struct QualityConfig {
  double max_accuracy_m = 50.0;
  int min_bins = 10;
  int min_days = 1;
  int max_days = 31;
};

struct TripgenConfig {
  std::vector<std::string> covariates;  // defaults to the nine reference-model covariates
  double correlation_threshold = 0.5;
  std::vector<std::string> drop_priority = {"population_density"};
};

struct ForecastConfig {
  std::vector<int> years = {2015, 2025, 2035, 2045};
};

struct CompareConfig {
  // CSV with zone_id,value[,year]; empty compares against the observed ODM.
  std::string reference;
  DayType day_type = DayType::kWeekday;
  Direction direction = Direction::kProduction;
};

struct PipelineConfig {
  PathsConfig paths;
  GeneralConfig general;
  QualityConfig quality;
  HomeOptions homes;
  StayOptions stays;
  ZoneLoadOptions zones;
  CostAggregation costs;
  CostFallbackConfig cost_fallback;
  BetaSearch calibration;
  TripgenConfig tripgen;
  ForecastConfig forecast;
  CompareConfig compare;
  SynthConfig synth;
  PingFormat synth_format = PingFormat::kCsv;

  PipelineConfig();

  /// Normalized view of every setting, recorded in the manifest.
  nlohmann::json to_json() const;
};

/// Builds a configuration from defaults, then the TOML file (when `path` is
/// non-empty), then `overrides` of the form section.key=value (TOML value
/// syntax; bare words are taken as strings). Unknown sections or keys and
/// out-of-range values raise ConfigError listing every offending key.
PipelineConfig load_config(const std::string& path = "",
                           const std::vector<std::string>& overrides = {});

/// Same as load_config but from TOML text.
PipelineConfig parse_config(const std::string& toml_text,
                            const std::vector<std::string>& overrides = {});

}  // namespace tripcast
