#include "tripcast/trips.h"

#include <istream>
#include <ostream>

#include "tripcast/csv.h"
#include "tripcast/error.h"

namespace tripcast {

std::vector<StayPoint> detect_stay_points(std::span<const Ping> pings,
                                          const StayOptions& options) {
  for (std::size_t i = 1; i < pings.size(); ++i)
    if (pings[i].timestamp < pings[i - 1].timestamp)
      throw DataError("pings not time-ordered");

  std::vector<StayPoint> stays;
  const std::size_t n = pings.size();
  std::size_t i = 0;
  while (i < n) {
    const LonLat anchor = pings[i].position();
    std::size_t j = i + 1;
    while (j < n && haversine_m(anchor, pings[j].position()) <= options.dist_m) ++j;
    // Run is [i, j).
    const std::size_t count = j - i;
    if (count >= 2 && pings[j - 1].timestamp - pings[i].timestamp >= options.min_stay_s) {
      std::vector<LonLat> members;
      members.reserve(count);
      for (std::size_t k = i; k < j; ++k) members.push_back(pings[k].position());
      StayPoint s;
      s.device_id = pings[i].device_id;
      s.centroid = mean_point(members);
      s.arrival = pings[i].timestamp;
      s.departure = pings[j - 1].timestamp;
      s.ping_count = static_cast<int>(count);
      stays.push_back(std::move(s));
      i = j;
    } else {
      ++i;
    }
  }
  return stays;
}

std::vector<std::span<const Ping>> split_on_gaps(std::span<const Ping> pings,
                                                 std::int64_t max_gap_s) {
  std::vector<std::span<const Ping>> out;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= pings.size(); ++i) {
    if (i == pings.size() || pings[i].timestamp - pings[i - 1].timestamp > max_gap_s) {
      if (i > start) out.push_back(pings.subspan(start, i - start));
      start = i;
    }
  }
  return out;
}

std::vector<Trip> segment_trips(std::span<const Ping> pings, std::span<const StayPoint> stays,
                                const TimeZone& tz) {
  std::vector<Trip> trips;
  if (stays.size() < 2) return trips;
  std::size_t cursor = 0;
  for (std::size_t s = 0; s + 1 < stays.size(); ++s) {
    const StayPoint& o = stays[s];
    const StayPoint& d = stays[s + 1];
    Trip t;
    t.device_id = o.device_id;
    t.origin_stay = o;
    t.dest_stay = d;
    t.depart = o.departure;
    t.arrive = d.arrival;
    t.travel_time = static_cast<double>(t.arrive - t.depart);
    t.day_type = classify_day_type(t.depart, tz);

    while (cursor < pings.size() && pings[cursor].timestamp <= o.departure) ++cursor;
    LonLat prev = o.centroid;
    double length = 0.0;
    std::size_t k = cursor;
    for (; k < pings.size() && pings[k].timestamp < d.arrival; ++k) {
      length += haversine_m(prev, pings[k].position());
      prev = pings[k].position();
    }
    length += haversine_m(prev, d.centroid);
    t.path_length = length;
    cursor = k;
    trips.push_back(std::move(t));
  }
  return trips;
}

DeviceTrips extract_device_trips(std::span<const Ping> pings, const StayOptions& options,
                                 const TimeZone& tz) {
  DeviceTrips out;
  for (auto segment : split_on_gaps(pings, options.max_gap_s)) {
    auto stays = detect_stay_points(segment, options);
    auto trips = segment_trips(segment, stays, tz);
    out.stays.insert(out.stays.end(), stays.begin(), stays.end());
    out.trips.insert(out.trips.end(), std::make_move_iterator(trips.begin()),
                     std::make_move_iterator(trips.end()));
  }
  return out;
}

void write_trips(std::ostream& out, std::span<const Trip> trips) {
  csv::Writer w(out);
  w.row({"device_id", "o_lon", "o_lat", "d_lon", "d_lat", "depart", "arrive", "travel_time_s",
         "path_length_m", "day_type", "weight"});
  for (const auto& t : trips) {
    w.field(t.device_id)
        .field(t.origin().lon)
        .field(t.origin().lat)
        .field(t.destination().lon)
        .field(t.destination().lat)
        .field(t.depart)
        .field(t.arrive)
        .field(t.travel_time)
        .field(t.path_length)
        .field(to_string(t.day_type))
        .field(t.weight);
    w.end_row();
  }
}

std::vector<Trip> read_trips(std::istream& in) {
  const csv::Table t = csv::read(in);
  const char* what = "trips";
  const auto c_id = t.require_column("device_id", what);
  const auto c_olon = t.require_column("o_lon", what);
  const auto c_olat = t.require_column("o_lat", what);
  const auto c_dlon = t.require_column("d_lon", what);
  const auto c_dlat = t.require_column("d_lat", what);
  const auto c_dep = t.require_column("depart", what);
  const auto c_arr = t.require_column("arrive", what);
  const auto c_tt = t.require_column("travel_time_s", what);
  const auto c_len = t.require_column("path_length_m", what);
  const auto c_day = t.require_column("day_type", what);
  const auto c_w = t.require_column("weight", what);
  std::vector<Trip> trips;
  trips.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto fail = [&] {
      return DataError("trips: malformed row at line " + std::to_string(t.line_numbers[r]));
    };
    if (row.size() != t.header.size()) throw fail();
    auto olon = csv::parse_double(row[c_olon]);
    auto olat = csv::parse_double(row[c_olat]);
    auto dlon = csv::parse_double(row[c_dlon]);
    auto dlat = csv::parse_double(row[c_dlat]);
    auto dep = csv::parse_int64(row[c_dep]);
    auto arr = csv::parse_int64(row[c_arr]);
    auto tt = csv::parse_double(row[c_tt]);
    auto len = csv::parse_double(row[c_len]);
    auto w = csv::parse_double(row[c_w]);
    if (!olon || !olat || !dlon || !dlat || !dep || !arr || !tt || !len || !w) throw fail();
    Trip trip;
    trip.device_id = row[c_id];
    trip.origin_stay.device_id = trip.device_id;
    trip.origin_stay.centroid = {*olon, *olat};
    trip.origin_stay.departure = *dep;
    trip.dest_stay.device_id = trip.device_id;
    trip.dest_stay.centroid = {*dlon, *dlat};
    trip.dest_stay.arrival = *arr;
    trip.depart = *dep;
    trip.arrive = *arr;
    trip.travel_time = *tt;
    trip.path_length = *len;
    trip.day_type = parse_day_type(row[c_day]);
    trip.weight = *w;
    trips.push_back(std::move(trip));
  }
  return trips;
}

void write_stays(std::ostream& out, std::span<const StayPoint> stays) {
  csv::Writer w(out);
  w.row({"device_id", "lon", "lat", "arrival", "departure", "ping_count"});
  for (const auto& s : stays) {
    w.field(s.device_id).field(s.centroid.lon).field(s.centroid.lat).field(s.arrival).field(
        s.departure).field(s.ping_count);
    w.end_row();
  }
}

}  // namespace tripcast
