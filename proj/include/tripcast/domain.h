#pragma once

// Shared value types of the trip-forecasting pipeline and their invariant
// checks. Nothing in here performs I/O.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tripcast/geo.h"
#include "tripcast/timezone.h"

namespace tripcast {

struct Ping {
  std::string device_id;
  double lon = 0.0;
  double lat = 0.0;
  std::int64_t timestamp = 0;  // UNIX seconds, UTC
  double accuracy = 0.0;       // meters

  LonLat position() const { return {lon, lat}; }

  friend bool operator==(const Ping&, const Ping&) = default;
};

// A zone's geometry is a list of polygon parts. Zones built per polygon part
// always hold exactly one part.
struct Zone {
  std::string zone_id;
  std::vector<Polygon> geometry;
  LonLat centroid;
  std::string county_id;
};

namespace attr {
inline constexpr const char* kTotalPopulation = "total_population";
inline constexpr const char* kPopulationDensity = "population_density";
inline constexpr const char* kPctPopGovQuarters = "pct_pop_gov_quarters";
inline constexpr const char* kAvgHhIncome = "avg_hh_income";
inline constexpr const char* kAvgVehicles = "avg_vehicles";
inline constexpr const char* kPctEmployed = "pct_employed";
inline constexpr const char* kPctEmpAgcon = "pct_emp_agcon";
inline constexpr const char* kPctEmpIndustry = "pct_emp_industry";
inline constexpr const char* kPctEmpRetail = "pct_emp_retail";
inline constexpr const char* kPctEmpFoodLodging = "pct_emp_foodlodging";
inline constexpr const char* kPctEmpProSrv = "pct_emp_prosrv";
inline constexpr const char* kPctEmpGovnmt = "pct_emp_govnmt";
inline constexpr const char* kPctEmpOthSrv = "pct_emp_othsrv";
}  // namespace attr

/// Canonical covariate names in their canonical order.
const std::vector<std::string>& canonical_sea_attributes();

/// True for attributes expressed in percent of population.
bool is_percentage_attribute(const std::string& name);

struct SeaRecord {
  std::string zone_id;
  int year = 0;
  // Ordered named covariates; absent values stay std::nullopt rather than 0.
  std::vector<std::pair<std::string, std::optional<double>>> attributes;

  std::optional<double> get(const std::string& name) const;
  void set(const std::string& name, std::optional<double> value);
};

struct StayPoint {
  std::string device_id;
  LonLat centroid;
  std::int64_t arrival = 0;
  std::int64_t departure = 0;
  int ping_count = 0;

  std::int64_t duration() const { return departure - arrival; }

  friend bool operator==(const StayPoint&, const StayPoint&) = default;
};

struct Trip {
  std::string device_id;
  StayPoint origin_stay;
  StayPoint dest_stay;
  std::int64_t depart = 0;
  std::int64_t arrive = 0;
  double travel_time = 0.0;  // seconds
  double path_length = 0.0;  // meters
  DayType day_type = DayType::kWeekday;
  double weight = 1.0;

  LonLat origin() const { return origin_stay.centroid; }
  LonLat destination() const { return dest_stay.centroid; }
};

struct ODMatrix {
  std::vector<std::string> zone_ids;
  Eigen::MatrixXd cells;  // n×n, row = origin
  DayType day_type = DayType::kWeekday;
  int year = 0;
  Eigen::VectorXd production;  // row sums
  Eigen::VectorXd attraction;  // column sums

  std::size_t size() const { return zone_ids.size(); }

  /// Recomputes production/attraction from cells.
  void refresh_marginals();
};

enum class CostStatistic { kMean, kMedian };
enum class CostMeasure { kTravelTime, kPathLength };

struct CostAggregation {
  CostStatistic statistic = CostStatistic::kMedian;
  CostMeasure measure = CostMeasure::kPathLength;

  friend bool operator==(const CostAggregation&, const CostAggregation&) = default;
};

std::string to_string(CostAggregation agg);
CostAggregation parse_cost_aggregation(const std::string& statistic,
                                       const std::string& measure);

enum class CellSource : std::uint8_t { kObserved, kFallback };

struct CostMatrix {
  std::vector<std::string> zone_ids;
  Eigen::MatrixXd cells;  // D_ij, seconds or meters
  CostAggregation aggregation;
  std::vector<CellSource> provenance;  // row-major, n*n

  std::size_t size() const { return zone_ids.size(); }
  CellSource source(std::size_t i, std::size_t j) const {
    return provenance[i * zone_ids.size() + j];
  }
};

enum class Direction { kProduction, kAttraction };
const char* to_string(Direction d);
Direction parse_direction(const std::string& s);

struct RegressionModel {
  std::vector<std::string> terms;  // "const" first, then covariates
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  std::vector<double> p_values;
  double r_squared = 0.0;
  double adj_r_squared = 0.0;
  double f_stat = 0.0;
  double f_p_value = 1.0;
  std::size_t n_obs = 0;
  DayType day_type = DayType::kWeekday;
  Direction direction = Direction::kProduction;

  /// Covariate names without the intercept.
  std::vector<std::string> covariates() const;
};

struct GravityModel {
  double beta = 0.0;
  CostAggregation aggregation;
  DayType day_type = DayType::kWeekday;
  double range_min = 0.1;
  double range_max = 3.0;
  std::vector<double> grid;  // strictly increasing β values
  std::vector<double> mse;   // one per grid point
};

struct RegionRepresentativeness {
  std::int64_t detected_homes = 0;
  std::int64_t population = 0;
  std::optional<double> ratio;  // absent when population == 0
};

struct RepresentativenessTable {
  std::map<std::string, RegionRepresentativeness> regions;
  std::int64_t homes_without_region = 0;
};

/// Groups pings by device id; each device's pings are stably sorted by
/// timestamp.
std::map<std::string, std::vector<Ping>> group_by_device(std::span<const Ping> pings);

// ---------------------------------------------------------------------------
// Validation. Never throws; each violated invariant yields one message.

struct ValidationResult {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  void fail(std::string message) { violations.push_back(std::move(message)); }
};

ValidationResult validate(const Ping& ping);
ValidationResult validate(const Zone& zone);
ValidationResult validate(const SeaRecord& record);
ValidationResult validate(std::span<const SeaRecord> records);
ValidationResult validate(const StayPoint& stay, std::int64_t min_stay_s = 600);
ValidationResult validate(const Trip& trip);
ValidationResult validate(const ODMatrix& odm);
ValidationResult validate(const CostMatrix& cost);
ValidationResult validate(const RegressionModel& model);
ValidationResult validate(const GravityModel& model);
ValidationResult validate(const RepresentativenessTable& table);

}  // namespace tripcast
