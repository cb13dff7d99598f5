#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tripcast/domain.h"
#include "tripcast/timezone.h"

namespace tripcast {

struct StayOptions {
  double dist_m = 100.0;         // roam radius around the run's first ping
  std::int64_t min_stay_s = 600;  // minimum dwell
  std::int64_t max_gap_s = 6 * 3600;
};

/// Rule-based stay detection over one device's time-ordered pings: a run
/// starts at an anchor ping and extends while pings stay within dist_m of the
/// anchor; runs lasting at least min_stay_s (and holding >= 2 pings) become
/// stays, and scanning resumes after the run. Otherwise scanning resumes at
/// the next ping. Throws DataError("pings not time-ordered") on unsorted
/// input.
std::vector<StayPoint> detect_stay_points(std::span<const Ping> pings,
                                          const StayOptions& options = {});

/// Splits a time-ordered ping record wherever consecutive pings are more
/// than max_gap_s apart.
std::vector<std::span<const Ping>> split_on_gaps(std::span<const Ping> pings,
                                                 std::int64_t max_gap_s);

/// One trip per consecutive stay pair. The path runs from the origin stay
/// centroid through every ping strictly between the two stays to the
/// destination centroid. Weight is 1; day type follows local departure time.
std::vector<Trip> segment_trips(std::span<const Ping> pings, std::span<const StayPoint> stays,
                                const TimeZone& tz);

struct DeviceTrips {
  std::vector<StayPoint> stays;
  std::vector<Trip> trips;
};

/// Gap split, stay detection and segmentation for one device.
DeviceTrips extract_device_trips(std::span<const Ping> pings, const StayOptions& options,
                                 const TimeZone& tz);

void write_trips(std::ostream& out, std::span<const Trip> trips);
/// Reads the trip export. Stay fields beyond the centroids and the
/// departure/arrival instants are not part of the format and stay default.
std::vector<Trip> read_trips(std::istream& in);

void write_stays(std::ostream& out, std::span<const StayPoint> stays);

}  // namespace tripcast
