#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tripcast/domain.h"
#include "tripcast/timezone.h"

namespace tripcast {

inline constexpr int kBinsPerDay = 48;

/// Keeps pings with accuracy <= max_error_m (boundary inclusive).
std::vector<Ping> filter_accuracy(std::span<const Ping> pings, double max_error_m = 50.0);

struct QualityCell {
  std::int64_t users = 0;
  std::int64_t pings = 0;
  double user_share = 0.0;
  double ping_share = 0.0;
};

// Double temporal frequency matrix: cell (b, d) counts the devices having at
// least d local days with pings in at least b distinct half-hour bins.
struct QualityMatrix {
  int year = 0;
  int max_days = 31;
  std::int64_t total_users = 0;
  std::int64_t total_pings = 0;
  std::int64_t out_of_year_pings = 0;
  std::vector<QualityCell> cells;  // (b - 1) * max_days + (d - 1)

  const QualityCell& at(int min_bins, int min_days) const {
    return cells[static_cast<std::size_t>((min_bins - 1) * max_days + (min_days - 1))];
  }
  QualityCell& at(int min_bins, int min_days) {
    return cells[static_cast<std::size_t>((min_bins - 1) * max_days + (min_days - 1))];
  }
};

/// Pings outside the local calendar year are skipped and counted.
QualityMatrix build_quality_matrix(std::span<const Ping> pings, int year, const TimeZone& tz,
                                   int max_days = 31);

/// Adds another partial matrix cellwise and recomputes shares.
void merge_into(QualityMatrix& into, const QualityMatrix& other);

void write_quality_matrix(std::ostream& out, const QualityMatrix& m);

struct UserFilterResult {
  std::vector<std::string> retained_devices;  // sorted
  std::vector<Ping> retained_pings;           // input order preserved
  std::int64_t total_users = 0;
  std::int64_t total_pings = 0;
  double user_share = 0.0;
  double ping_share = 0.0;
};

/// Keeps every ping of devices with at least `min_days` local days that each
/// contain pings in at least `min_bins` distinct half-hour bins.
UserFilterResult filter_users(std::span<const Ping> pings, int min_bins, int min_days,
                              const TimeZone& tz);

}  // namespace tripcast
