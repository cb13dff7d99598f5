#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tripcast/domain.h"
#include "tripcast/ingest.h"
#include "tripcast/timezone.h"

namespace tripcast {

struct HomeEstimate {
  std::string device_id;
  LonLat home;
  std::optional<std::string> zone_id;
  std::optional<std::string> county_id;
  int nights = 0;  // distinct local nights supporting the home mode
};

struct NightWindow {
  int start_hour = 21;  // inclusive
  int end_hour = 6;     // exclusive

  bool contains(const LocalTime& t) const;
  /// Night identifier: pings after midnight belong to the previous evening's
  /// night when the window wraps around midnight.
  std::int64_t night_of(const LocalTime& t) const;
};

/// Pings whose local time falls in the half-open night window.
std::vector<Ping> nighttime_pings(std::span<const Ping> pings, const TimeZone& tz,
                                  const NightWindow& window = {});

struct MeanShiftOptions {
  double bandwidth_m = 100.0;
  double tolerance_m = 1.0;
  int max_iterations = 100;
};

struct Mode {
  LonLat center;
  std::size_t count = 0;  // points whose nearest mode is this one
};

/// Flat-kernel mean-shift. Seeds come from a bandwidth/2 grid; each seed moves
/// to the mean of the points within the bandwidth until it moves less than
/// the tolerance. Modes closer than the bandwidth merge (the mode with more
/// support survives). Result order: count descending, then south-to-north,
/// west-to-east. Throws std::invalid_argument on empty input.
std::vector<Mode> mean_shift(std::span<const LonLat> points, const MeanShiftOptions& options = {});

/// Index of the nearest mode (ties → lowest index).
std::size_t nearest_mode(std::span<const Mode> modes, const LonLat& p);

struct HomeOptions {
  NightWindow window;
  MeanShiftOptions mean_shift;
};

/// Home = night mode supported by the most distinct nights; ties prefer more
/// pings, then the southernmost, then the westernmost mode. Returns nullopt
/// when the device has no nighttime pings.
std::optional<HomeEstimate> detect_home(std::span<const Ping> device_pings, const TimeZone& tz,
                                        const HomeOptions& options = {});

/// Detects homes for every device and resolves zone and county through the
/// index when one is supplied. Output sorted by device id.
std::vector<HomeEstimate> detect_homes(const std::map<std::string, std::vector<Ping>>& by_device,
                                       const TimeZone& tz, const HomeOptions& options,
                                       const ZoneIndex* index, int workers = 1);

/// r(region) = homes(region) / population(region). Regions in the population
/// table without homes get r = 0; population 0 leaves r absent. Throws
/// DataError listing regions that have homes but no population row.
RepresentativenessTable compute_representativeness(
    std::span<const HomeEstimate> homes, const std::map<std::string, std::int64_t>& population);

/// 1 / r(home county), or nullopt when the device has no home, no home county,
/// or r is zero or missing.
std::optional<double> user_weight(const std::string& device_id,
                                  const std::map<std::string, HomeEstimate>& homes,
                                  const RepresentativenessTable& table);

struct UserWeights {
  std::map<std::string, double> weights;
  std::int64_t missing_home = 0;
  std::int64_t missing_region = 0;
  std::int64_t zero_ratio = 0;
};

UserWeights compute_user_weights(std::span<const std::string> devices,
                                 std::span<const HomeEstimate> homes,
                                 const RepresentativenessTable& table);

void write_homes(std::ostream& out, std::span<const HomeEstimate> homes);
std::vector<HomeEstimate> read_homes(std::istream& in);
void write_representativeness(std::ostream& out, const RepresentativenessTable& table);
RepresentativenessTable read_representativeness(std::istream& in);
void write_weights(std::ostream& out, const UserWeights& weights);
std::map<std::string, double> read_weights(std::istream& in);

}  // namespace tripcast
