#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tripcast/domain.h"
#include "tripcast/ingest.h"

namespace tripcast {

struct OdmDiagnostics {
  std::int64_t included = 0;
  std::int64_t outside_zones = 0;     // either endpoint outside all zones
  std::int64_t other_day_type = 0;
};

// Partial weighted OD counts; partitions merge by cellwise addition.
class OdmAccumulator {
 public:
  OdmAccumulator(const ZoneIndex& index, DayType day_type);

  void add(const Trip& trip);
  void merge(const OdmAccumulator& other);

  /// Divides by the number of observed days of this day type. Throws
  /// DataError when observed_days is zero.
  ODMatrix finish(int year, std::int64_t observed_days) const;

  const OdmDiagnostics& diagnostics() const { return diag_; }

 private:
  const ZoneIndex* index_;
  DayType day_type_;
  Eigen::MatrixXd sums_;
  OdmDiagnostics diag_;
};

struct OdmBuildResult {
  ODMatrix odm;
  OdmDiagnostics diagnostics;
};

/// Typical-day OD matrix: weighted trip counts of one day type divided by the
/// number of observed days of that type.
OdmBuildResult build_odm(std::span<const Trip> trips, const ZoneIndex& index, DayType day_type,
                         int year, std::int64_t observed_days);

/// Row sums (production) and column sums (attraction).
std::pair<Eigen::VectorXd, Eigen::VectorXd> odm_marginals(const Eigen::MatrixXd& cells);

struct ObservedDays {
  std::int64_t weekday = 0;
  std::int64_t weekend = 0;

  std::int64_t of(DayType t) const { return t == DayType::kWeekday ? weekday : weekend; }
};

/// Counts local calendar days of each type in [first, last] (inclusive).
ObservedDays count_observed_days(std::int64_t first_ts, std::int64_t last_ts,
                                 const TimeZone& tz);

struct CostFallbackConfig {
  // Speed used for travel-time fallbacks when no trip has been observed.
  double default_speed_mps = 10.0;
  double min_cost = 1.0;
};

/// Observed zone-pair cost samples; partitions merge by concatenating
/// samples.
class CostAccumulator {
 public:
  explicit CostAccumulator(const ZoneIndex& index,
                           std::optional<DayType> day_type = std::nullopt);

  void add(const Trip& trip);
  void merge(const CostAccumulator& other);

  CostMatrix finish(CostAggregation aggregation, const CostFallbackConfig& fallback = {}) const;

  /// Global mean observed speed Σ path_length / Σ travel_time (m/s), or
  /// nullopt when no positive travel time was seen.
  std::optional<double> mean_speed() const;

 private:
  const ZoneIndex* index_;
  std::optional<DayType> day_type_;
  std::vector<std::vector<double>> times_;    // n*n sample lists
  std::vector<std::vector<double>> lengths_;  // n*n sample lists
  double sum_length_ = 0.0;
  double sum_time_ = 0.0;
};

/// D_ij = mean or median over observed trips i→j of travel time or path
/// length. Unobserved pairs fall back to the centroid haversine distance
/// (divided by the mean observed speed for time costs); unobserved
/// intrazonal cells use half the distance to the nearest other centroid.
/// Every cell is clamped to at least fallback.min_cost.
CostMatrix build_cost_matrix(std::span<const Trip> trips, const ZoneIndex& index,
                             CostAggregation aggregation,
                             const CostFallbackConfig& fallback = {},
                             std::optional<DayType> day_type = std::nullopt);

/// Sparse CSV (origin_zone, dest_zone, value, provenance); zero OD cells are
/// omitted.
void write_odm(std::ostream& out, const ODMatrix& odm);
ODMatrix read_odm(std::istream& in, const std::vector<std::string>& zone_ids, DayType day_type,
                  int year);
void write_cost_matrix(std::ostream& out, const CostMatrix& cost);
CostMatrix read_cost_matrix(std::istream& in, const std::vector<std::string>& zone_ids,
                            CostAggregation aggregation);

/// Dense CSV with a header row of zone ids, for small matrices.
void write_dense(std::ostream& out, const std::vector<std::string>& zone_ids,
                 const Eigen::MatrixXd& cells);

}  // namespace tripcast
