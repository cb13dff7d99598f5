#include "tripcast/homes.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "tripcast/csv.h"
#include "tripcast/error.h"
#include "tripcast/parallel.h"

namespace tripcast {

bool NightWindow::contains(const LocalTime& t) const {
  const int s = t.seconds_of_day();
  const int start = start_hour * 3600;
  const int end = end_hour * 3600;
  if (start > end) return s >= start || s < end;
  return s >= start && s < end;
}

std::int64_t NightWindow::night_of(const LocalTime& t) const {
  if (start_hour > end_hour && t.seconds_of_day() < end_hour * 3600) return t.day - 1;
  return t.day;
}

std::vector<Ping> nighttime_pings(std::span<const Ping> pings, const TimeZone& tz,
                                  const NightWindow& window) {
  std::vector<Ping> out;
  for (const auto& p : pings)
    if (window.contains(tz.local(p.timestamp))) out.push_back(p);
  return out;
}

// ---------------------------------------------------------------------------
// Mean-shift

namespace {

constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;

// Equirectangular projection around a reference point, used only to bucket
// points; all distance decisions use haversine.
struct LocalFrame {
  LonLat ref;
  double kx = 0.0;

  explicit LocalFrame(LonLat r)
      : ref(r), kx(kMetersPerDegree * std::cos(r.lat * std::numbers::pi / 180.0)) {}

  double x(const LonLat& p) const { return (p.lon - ref.lon) * kx; }
  double y(const LonLat& p) const { return (p.lat - ref.lat) * kMetersPerDegree; }
};

struct CellKey {
  std::int64_t cx;
  std::int64_t cy;
  friend bool operator==(const CellKey&, const CellKey&) = default;
  friend bool operator<(const CellKey& a, const CellKey& b) {
    return a.cx != b.cx ? a.cx < b.cx : a.cy < b.cy;
  }
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    return std::hash<std::int64_t>()(k.cx * 73856093LL ^ k.cy * 19349663LL);
  }
};

class NeighborGrid {
 public:
  NeighborGrid(std::span<const LonLat> points, const LocalFrame& frame, double cell)
      : points_(points), frame_(frame), cell_(cell) {
    for (std::size_t i = 0; i < points.size(); ++i) cells_[key(points[i])].push_back(i);
  }

  CellKey key(const LonLat& p) const {
    return {static_cast<std::int64_t>(std::floor(frame_.x(p) / cell_)),
            static_cast<std::int64_t>(std::floor(frame_.y(p) / cell_))};
  }

  // Calls fn(i) for every point within `radius_m` (haversine) of c.
  template <class Fn>
  void for_each_within(const LonLat& c, double radius_m, Fn&& fn) const {
    const CellKey k = key(c);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find({k.cx + dx, k.cy + dy});
        if (it == cells_.end()) continue;
        for (std::size_t i : it->second)
          if (haversine_m(c, points_[i]) <= radius_m) fn(i);
      }
    }
  }

 private:
  std::span<const LonLat> points_;
  const LocalFrame& frame_;
  double cell_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> cells_;
};

bool mode_order(const Mode& a, const Mode& b) {
  if (a.count != b.count) return a.count > b.count;
  if (a.center.lat != b.center.lat) return a.center.lat < b.center.lat;
  return a.center.lon < b.center.lon;
}

}  // namespace

std::size_t nearest_mode(std::span<const Mode> modes, const LonLat& p) {
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const double d = haversine_m(modes[m].center, p);
    if (d < best_d) {
      best_d = d;
      best = m;
    }
  }
  return best;
}

std::vector<Mode> mean_shift(std::span<const LonLat> input, const MeanShiftOptions& opt) {
  if (input.empty()) throw std::invalid_argument("mean_shift: no points");
  if (!(opt.bandwidth_m > 0)) throw std::invalid_argument("mean_shift: bandwidth must be > 0");

  // Canonical order makes every floating-point sum independent of input order.
  std::vector<LonLat> points(input.begin(), input.end());
  std::sort(points.begin(), points.end(), [](const LonLat& a, const LonLat& b) {
    return a.lon != b.lon ? a.lon < b.lon : a.lat < b.lat;
  });

  const LocalFrame frame(points.front());
  // A 10% margin on the bucket size absorbs projection error against haversine.
  const NeighborGrid grid(points, frame, opt.bandwidth_m * 1.1);

  // Bin seeding at half the bandwidth.
  std::map<CellKey, std::pair<LonLat, std::size_t>> bins;
  const double seed_cell = opt.bandwidth_m / 2.0;
  for (const auto& p : points) {
    const CellKey k{static_cast<std::int64_t>(std::floor(frame.x(p) / seed_cell)),
                    static_cast<std::int64_t>(std::floor(frame.y(p) / seed_cell))};
    auto& [sum, n] = bins[k];
    sum.lon += p.lon;
    sum.lat += p.lat;
    ++n;
  }

  struct Candidate {
    LonLat center;
    std::size_t support;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(bins.size());
  for (const auto& [k, acc] : bins) {
    LonLat c{acc.first.lon / static_cast<double>(acc.second),
             acc.first.lat / static_cast<double>(acc.second)};
    std::size_t support = 0;
    for (int it = 0; it < opt.max_iterations; ++it) {
      double lon = 0.0, lat = 0.0;
      std::size_t n = 0;
      grid.for_each_within(c, opt.bandwidth_m, [&](std::size_t i) {
        lon += points[i].lon;
        lat += points[i].lat;
        ++n;
      });
      support = n;
      if (n == 0) break;
      const LonLat next{lon / static_cast<double>(n), lat / static_cast<double>(n)};
      const double shift = haversine_m(c, next);
      c = next;
      if (shift < opt.tolerance_m) break;
    }
    if (support == 0) continue;
    candidates.push_back({c, support});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.support != b.support) return a.support > b.support;
    if (a.center.lat != b.center.lat) return a.center.lat < b.center.lat;
    return a.center.lon < b.center.lon;
  });

  std::vector<Mode> modes;
  for (const auto& cand : candidates) {
    bool merged = false;
    for (const auto& m : modes) {
      if (haversine_m(m.center, cand.center) < opt.bandwidth_m) {
        merged = true;
        break;
      }
    }
    if (!merged) modes.push_back({cand.center, 0});
  }
  for (const auto& p : points) ++modes[nearest_mode(modes, p)].count;
  std::sort(modes.begin(), modes.end(), mode_order);
  return modes;
}

// ---------------------------------------------------------------------------
// Homes

std::optional<HomeEstimate> detect_home(std::span<const Ping> device_pings, const TimeZone& tz,
                                        const HomeOptions& options) {
  std::vector<LonLat> points;
  std::vector<std::int64_t> nights;
  for (const auto& p : device_pings) {
    const LocalTime lt = tz.local(p.timestamp);
    if (!options.window.contains(lt)) continue;
    points.push_back(p.position());
    nights.push_back(options.window.night_of(lt));
  }
  if (points.empty()) return std::nullopt;

  const std::vector<Mode> modes = mean_shift(points, options.mean_shift);
  std::vector<std::set<std::int64_t>> support(modes.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    support[nearest_mode(modes, points[i])].insert(nights[i]);

  std::size_t best = 0;
  for (std::size_t m = 1; m < modes.size(); ++m) {
    const auto nb = support[best].size(), nm = support[m].size();
    if (nm != nb) {
      if (nm > nb) best = m;
      continue;
    }
    if (modes[m].count != modes[best].count) {
      if (modes[m].count > modes[best].count) best = m;
      continue;
    }
    const LonLat& a = modes[m].center;
    const LonLat& b = modes[best].center;
    if (a.lat < b.lat || (a.lat == b.lat && a.lon < b.lon)) best = m;
  }
  HomeEstimate h;
  h.device_id = device_pings.front().device_id;
  h.home = modes[best].center;
  h.nights = static_cast<int>(support[best].size());
  return h;
}

std::vector<HomeEstimate> detect_homes(const std::map<std::string, std::vector<Ping>>& by_device,
                                       const TimeZone& tz, const HomeOptions& options,
                                       const ZoneIndex* index, int workers) {
  std::vector<const std::vector<Ping>*> devices;
  devices.reserve(by_device.size());
  for (const auto& [id, pings] : by_device) devices.push_back(&pings);
  std::vector<std::optional<HomeEstimate>> slots(devices.size());
  parallel_for(devices.size(), workers, [&](std::size_t i) {
    auto h = detect_home(*devices[i], tz, options);
    if (h && index) {
      if (auto pos = index->locate(h->home)) {
        h->zone_id = index->zone(*pos).zone_id;
        h->county_id = index->zone(*pos).county_id;
      }
    }
    slots[i] = std::move(h);
  });
  std::vector<HomeEstimate> out;
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  return out;
}

RepresentativenessTable compute_representativeness(
    std::span<const HomeEstimate> homes, const std::map<std::string, std::int64_t>& population) {
  RepresentativenessTable table;
  std::map<std::string, std::int64_t> counts;
  for (const auto& h : homes) {
    if (!h.county_id) {
      ++table.homes_without_region;
      continue;
    }
    ++counts[*h.county_id];
  }
  std::vector<std::string> missing;
  for (const auto& [region, n] : counts)
    if (!population.count(region)) missing.push_back(region);
  if (!missing.empty()) {
    std::string msg = "regions with detected homes but no population row:";
    for (const auto& r : missing) msg += " " + r;
    throw DataError(msg);
  }
  for (const auto& [region, pop] : population) {
    RegionRepresentativeness rep;
    rep.population = pop;
    auto it = counts.find(region);
    rep.detected_homes = it == counts.end() ? 0 : it->second;
    if (pop > 0)
      rep.ratio = static_cast<double>(rep.detected_homes) / static_cast<double>(pop);
    table.regions.emplace(region, rep);
  }
  return table;
}

std::optional<double> user_weight(const std::string& device_id,
                                  const std::map<std::string, HomeEstimate>& homes,
                                  const RepresentativenessTable& table) {
  auto h = homes.find(device_id);
  if (h == homes.end() || !h->second.county_id) return std::nullopt;
  auto r = table.regions.find(*h->second.county_id);
  if (r == table.regions.end() || !r->second.ratio || *r->second.ratio <= 0.0)
    return std::nullopt;
  return 1.0 / *r->second.ratio;
}

UserWeights compute_user_weights(std::span<const std::string> devices,
                                 std::span<const HomeEstimate> homes,
                                 const RepresentativenessTable& table) {
  std::map<std::string, HomeEstimate> by_id;
  for (const auto& h : homes) by_id.emplace(h.device_id, h);
  UserWeights out;
  for (const auto& d : devices) {
    auto h = by_id.find(d);
    if (h == by_id.end()) {
      ++out.missing_home;
      continue;
    }
    if (!h->second.county_id) {
      ++out.missing_region;
      continue;
    }
    auto w = user_weight(d, by_id, table);
    if (!w) {
      ++out.zero_ratio;
      continue;
    }
    out.weights.emplace(d, *w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

void write_homes(std::ostream& out, std::span<const HomeEstimate> homes) {
  csv::Writer w(out);
  w.row({"device_id", "lon", "lat", "zone_id", "county_id", "nights"});
  for (const auto& h : homes) {
    w.field(h.device_id).field(h.home.lon).field(h.home.lat);
    w.field(h.zone_id.value_or("")).field(h.county_id.value_or("")).field(h.nights);
    w.end_row();
  }
}

std::vector<HomeEstimate> read_homes(std::istream& in) {
  const csv::Table t = csv::read(in);
  const auto id = t.require_column("device_id", "homes");
  const auto lon = t.require_column("lon", "homes");
  const auto lat = t.require_column("lat", "homes");
  const auto zone = t.require_column("zone_id", "homes");
  const auto county = t.require_column("county_id", "homes");
  const auto nights = t.require_column("nights", "homes");
  std::vector<HomeEstimate> out;
  for (const auto& row : t.rows) {
    HomeEstimate h;
    h.device_id = row.at(id);
    auto x = csv::parse_double(row.at(lon));
    auto y = csv::parse_double(row.at(lat));
    auto n = csv::parse_int64(row.at(nights));
    if (!x || !y || !n) throw DataError("homes: malformed row for " + h.device_id);
    h.home = {*x, *y};
    if (!row.at(zone).empty()) h.zone_id = row.at(zone);
    if (!row.at(county).empty()) h.county_id = row.at(county);
    h.nights = static_cast<int>(*n);
    out.push_back(std::move(h));
  }
  return out;
}

void write_representativeness(std::ostream& out, const RepresentativenessTable& table) {
  csv::Writer w(out);
  w.row({"county_id", "detected_homes", "population", "ratio"});
  for (const auto& [region, rep] : table.regions) {
    w.field(region).field(rep.detected_homes).field(rep.population);
    if (rep.ratio) {
      w.field(*rep.ratio);
    } else {
      w.blank();
    }
    w.end_row();
  }
}

RepresentativenessTable read_representativeness(std::istream& in) {
  const csv::Table t = csv::read(in);
  const auto region = t.require_column("county_id", "representativeness");
  const auto homes = t.require_column("detected_homes", "representativeness");
  const auto pop = t.require_column("population", "representativeness");
  const auto ratio = t.require_column("ratio", "representativeness");
  RepresentativenessTable table;
  for (const auto& row : t.rows) {
    RegionRepresentativeness rep;
    auto h = csv::parse_int64(row.at(homes));
    auto p = csv::parse_int64(row.at(pop));
    if (!h || !p) throw DataError("representativeness: malformed row");
    rep.detected_homes = *h;
    rep.population = *p;
    if (!row.at(ratio).empty()) rep.ratio = csv::parse_double(row.at(ratio));
    table.regions.emplace(row.at(region), rep);
  }
  return table;
}

void write_weights(std::ostream& out, const UserWeights& weights) {
  csv::Writer w(out);
  w.row({"device_id", "weight"});
  for (const auto& [id, value] : weights.weights) {
    w.field(id).field(value);
    w.end_row();
  }
}

std::map<std::string, double> read_weights(std::istream& in) {
  const csv::Table t = csv::read(in);
  const auto id = t.require_column("device_id", "weights");
  const auto weight = t.require_column("weight", "weights");
  std::map<std::string, double> out;
  for (const auto& row : t.rows) {
    auto v = csv::parse_double(row.at(weight));
    if (!v || !(*v > 0)) throw DataError("weights: malformed weight for " + row.at(id));
    out.emplace(row.at(id), *v);
  }
  return out;
}

}  // namespace tripcast
