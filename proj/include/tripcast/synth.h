#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tripcast/domain.h"
#include "tripcast/ingest.h"
#include "tripcast/matrices.h"

namespace tripcast {

// Synthetic study area and behaviour. Zones form a grid of squares; counties
// are square blocks of zones. Residents live in zones in proportion to
// W_i · Σ_k W_k D_ik^-β, so that home-activity-home tours yield a symmetric
// OD matrix that is exactly a production-constrained gravity matrix with
// exponent β.
struct SynthConfig {
  std::uint64_t seed = 42;

  int grid_cols = 6;
  int grid_rows = 5;
  int county_block = 2;  // zones per county side
  double zone_size_m = 2000.0;
  double origin_lon = -86.30;
  double origin_lat = 39.60;
  int locations_per_zone = 6;   // home/activity sites per zone
  double min_location_sep_m = 300.0;

  std::int64_t residents = 7000;
  double sampling_rate = 0.3;
  double attraction_min = 0.5;
  double attraction_max = 3.0;
  double beta = 1.5;

  std::string timezone = "America/Indiana/Indianapolis";
  int start_year = 2021;
  int start_month = 6;
  int start_day = 7;
  int days = 14;

  double weekday_tour_probability = 0.95;
  double weekend_tour_probability = 0.8;
  double second_tour_probability = 0.3;
  int activity_min_s = 2700;
  int activity_max_s = 10800;

  int stay_cadence_s = 900;
  int moving_cadence_s = 60;
  double speed_mps = 8.0;
  double noise_m = 10.0;
  double bad_accuracy_fraction = 0.05;
  double sparse_device_fraction = 0.1;
  int sparse_pings_per_day = 4;

  // SEA tables are produced for the study year and every listed year.
  std::vector<int> sea_years = {2015, 2025, 2035, 2045};
  double population_growth_per_decade = 0.045;
};

/// Throws ConfigError naming the first out-of-range field.
void validate(const SynthConfig& config);

struct SynthDevice {
  std::string device_id;
  std::string home_zone;
  std::string county_id;
  LonLat home;
  bool sparse = false;  // emits too few pings to pass the quality filter
};

struct SynthResult {
  std::vector<Zone> zones;
  std::vector<Ping> pings;  // grouped by device, time-ordered
  std::vector<SynthDevice> devices;
  std::vector<StayPoint> stays;
  std::vector<Trip> trips;  // weight = county population / sampled devices
  std::map<std::string, std::int64_t> zone_population;
  std::map<std::string, std::int64_t> county_population;
  std::vector<SeaRecord> sea;
  Eigen::VectorXd attractiveness;
  Eigen::MatrixXd planted_cost;  // median site-to-site distance, meters
  ODMatrix odm_weekday;          // upscaled trips per typical day
  ODMatrix odm_weekend;
  ObservedDays observed_days;
  double beta = 0.0;
  int year = 0;
};

/// Deterministic in (config, seed); each device draws from its own stream
/// seeded by (seed, device index). Throws ConfigError for an empty zone grid.
SynthResult generate_traces(const SynthConfig& config, int workers = 1);

/// Writes pings (CSV or NDJSON), zones.geojson, sea.csv, population.csv and
/// truth_*.csv/truth.json into `dir`, which must exist. Returns the ping
/// file path.
std::string write_synth(const SynthResult& result, const std::string& dir,
                        PingFormat format = PingFormat::kCsv);

}  // namespace tripcast
