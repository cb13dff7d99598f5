#include "tripcast/domain.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "tripcast/error.h"

namespace tripcast {

const std::vector<std::string>& canonical_sea_attributes() {
  static const std::vector<std::string> names = {
      attr::kTotalPopulation, attr::kPopulationDensity, attr::kPctPopGovQuarters,
      attr::kAvgHhIncome,     attr::kAvgVehicles,       attr::kPctEmployed,
      attr::kPctEmpAgcon,     attr::kPctEmpIndustry,    attr::kPctEmpRetail,
      attr::kPctEmpFoodLodging, attr::kPctEmpProSrv,    attr::kPctEmpGovnmt,
      attr::kPctEmpOthSrv};
  return names;
}

bool is_percentage_attribute(const std::string& name) {
  return name.rfind("pct_", 0) == 0;
}

std::optional<double> SeaRecord::get(const std::string& name) const {
  for (const auto& [key, value] : attributes)
    if (key == name) return value;
  return std::nullopt;
}

void SeaRecord::set(const std::string& name, std::optional<double> value) {
  for (auto& [key, v] : attributes) {
    if (key == name) {
      v = value;
      return;
    }
  }
  attributes.emplace_back(name, value);
}

void ODMatrix::refresh_marginals() {
  production = cells.rowwise().sum();
  attraction = cells.colwise().sum().transpose();
}

std::string to_string(CostAggregation agg) {
  std::string s = agg.statistic == CostStatistic::kMean ? "mean" : "median";
  s += agg.measure == CostMeasure::kTravelTime ? "_travel_time" : "_path_length";
  return s;
}

CostAggregation parse_cost_aggregation(const std::string& statistic,
                                       const std::string& measure) {
  CostAggregation agg;
  if (statistic == "mean") {
    agg.statistic = CostStatistic::kMean;
  } else if (statistic == "median") {
    agg.statistic = CostStatistic::kMedian;
  } else {
    throw ConfigError("cost statistic must be 'mean' or 'median', got '" + statistic + "'");
  }
  if (measure == "travel_time") {
    agg.measure = CostMeasure::kTravelTime;
  } else if (measure == "path_length") {
    agg.measure = CostMeasure::kPathLength;
  } else {
    throw ConfigError("cost measure must be 'travel_time' or 'path_length', got '" +
                      measure + "'");
  }
  return agg;
}

const char* to_string(Direction d) {
  return d == Direction::kProduction ? "production" : "attraction";
}

Direction parse_direction(const std::string& s) {
  if (s == "production") return Direction::kProduction;
  if (s == "attraction") return Direction::kAttraction;
  throw DataError("unknown direction '" + s + "'");
}

std::vector<std::string> RegressionModel::covariates() const {
  if (terms.empty()) return {};
  return {terms.begin() + 1, terms.end()};
}

std::map<std::string, std::vector<Ping>> group_by_device(std::span<const Ping> pings) {
  std::map<std::string, std::vector<Ping>> out;
  for (const auto& p : pings) out[p.device_id].push_back(p);
  for (auto& [id, v] : out)
    std::stable_sort(v.begin(), v.end(),
                     [](const Ping& a, const Ping& b) { return a.timestamp < b.timestamp; });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool close_rel(double a, double b, double rel) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) <= rel * scale;
}

}  // namespace

ValidationResult validate(const Ping& ping) {
  ValidationResult r;
  if (!(ping.lat >= -90.0 && ping.lat <= 90.0)) r.fail("lat out of range");
  if (!(ping.lon >= -180.0 && ping.lon <= 180.0)) r.fail("lon out of range");
  if (!(ping.accuracy >= 0.0)) r.fail("negative accuracy");
  if (ping.timestamp <= 0) r.fail("non-positive timestamp");
  return r;
}

ValidationResult validate(const Zone& zone) {
  ValidationResult r;
  if (zone.zone_id.empty()) r.fail("empty zone id");
  if (zone.geometry.empty()) r.fail("zone has no geometry");
  for (const auto& part : zone.geometry) {
    if (!ring_is_closed(part.outer)) {
      r.fail("outer ring not closed");
    } else if (ring_self_intersects(part.outer)) {
      r.fail("outer ring self-intersects");
    }
    for (const auto& hole : part.holes)
      if (!ring_is_closed(hole)) r.fail("hole ring not closed");
  }
  if (!zone.geometry.empty()) {
    const BoundingBox box = bounding_box(zone.geometry);
    if (!box.contains(zone.centroid)) r.fail("centroid outside bounding box");
  }
  return r;
}

ValidationResult validate(const SeaRecord& record) {
  ValidationResult r;
  if (record.zone_id.empty()) r.fail("empty zone id");
  for (const auto& [name, value] : record.attributes) {
    if (!value) continue;
    if (!std::isfinite(*value)) {
      r.fail(name + " is not finite");
    } else if (name == attr::kTotalPopulation && *value < 0) {
      r.fail("negative total_population");
    } else if (is_percentage_attribute(name) && (*value < 0 || *value > 100)) {
      r.fail(name + " outside [0, 100]");
    }
  }
  return r;
}

ValidationResult validate(std::span<const SeaRecord> records) {
  ValidationResult r;
  std::map<int, std::set<std::string>> names_by_year;
  for (const auto& rec : records) {
    for (auto& v : validate(rec).violations) r.fail(rec.zone_id + ": " + v);
    std::set<std::string> names;
    for (const auto& [name, value] : rec.attributes) names.insert(name);
    auto [it, inserted] = names_by_year.emplace(rec.year, names);
    if (!inserted && it->second != names) {
      r.fail(rec.zone_id + ": attribute set differs from other records of year " +
             std::to_string(rec.year));
    }
  }
  return r;
}

ValidationResult validate(const StayPoint& stay, std::int64_t min_stay_s) {
  ValidationResult r;
  if (stay.duration() < min_stay_s) r.fail("stay shorter than minimum duration");
  if (stay.ping_count < 2) r.fail("stay has fewer than two pings");
  return r;
}

ValidationResult validate(const Trip& trip) {
  ValidationResult r;
  if (trip.arrive < trip.depart) r.fail("arrival before departure");
  if (trip.travel_time != static_cast<double>(trip.arrive - trip.depart))
    r.fail("travel_time differs from arrive - depart");
  const double direct = haversine_m(trip.origin(), trip.destination());
  if (trip.path_length < direct * (1.0 - 1e-9) - 1e-9)
    r.fail("path_length shorter than great-circle distance");
  if (!(trip.weight > 0.0) || !std::isfinite(trip.weight)) r.fail("non-positive weight");
  return r;
}

ValidationResult validate(const ODMatrix& odm) {
  ValidationResult r;
  const auto n = static_cast<Eigen::Index>(odm.zone_ids.size());
  if (odm.cells.rows() != n || odm.cells.cols() != n) {
    r.fail("cell matrix shape does not match zone index");
    return r;
  }
  if (odm.production.size() != n || odm.attraction.size() != n) {
    r.fail("marginal vector length does not match zone index");
    return r;
  }
  if ((odm.cells.array() < 0).any() || !odm.cells.allFinite())
    r.fail("negative or non-finite cell");
  bool mismatch = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!close_rel(odm.production(i), odm.cells.row(i).sum(), 1e-9)) mismatch = true;
    if (!close_rel(odm.attraction(i), odm.cells.col(i).sum(), 1e-9)) mismatch = true;
  }
  if (mismatch) r.fail("marginal mismatch");
  if (!close_rel(odm.production.sum(), odm.attraction.sum(), 1e-9))
    r.fail("production and attraction totals differ");
  return r;
}

ValidationResult validate(const CostMatrix& cost) {
  ValidationResult r;
  const auto n = static_cast<Eigen::Index>(cost.zone_ids.size());
  if (cost.cells.rows() != n || cost.cells.cols() != n) {
    r.fail("cell matrix shape does not match zone index");
    return r;
  }
  if (cost.provenance.size() != static_cast<std::size_t>(n * n))
    r.fail("provenance size does not match zone index");
  if (!(cost.cells.array() > 0).all() || !cost.cells.allFinite())
    r.fail("non-positive cost cell");
  return r;
}

ValidationResult validate(const RegressionModel& m) {
  ValidationResult r;
  const std::size_t k = m.coefficients.size();
  if (m.terms.size() != k || m.std_errors.size() != k || m.t_stats.size() != k ||
      m.p_values.size() != k)
    r.fail("statistic lists differ in length");
  if (m.adj_r_squared > 1.0) r.fail("adjusted R^2 above 1");
  if (!(m.f_stat >= 0.0)) r.fail("negative F statistic");
  return r;
}

ValidationResult validate(const GravityModel& m) {
  ValidationResult r;
  if (!(m.beta >= m.range_min - 1e-12 && m.beta <= m.range_max + 1e-12))
    r.fail("beta outside search range");
  if (m.beta < 0) r.fail("negative beta");
  for (std::size_t i = 1; i < m.grid.size(); ++i)
    if (!(m.grid[i] > m.grid[i - 1])) r.fail("calibration grid not strictly increasing");
  if (m.grid.size() != m.mse.size()) r.fail("grid and MSE record differ in length");
  return r;
}

ValidationResult validate(const RepresentativenessTable& table) {
  ValidationResult r;
  for (const auto& [region, rep] : table.regions) {
    if (rep.detected_homes < 0 || rep.population < 0)
      r.fail(region + ": negative count");
    if (rep.population > 0) {
      const double expected =
          static_cast<double>(rep.detected_homes) / static_cast<double>(rep.population);
      if (!rep.ratio || !close_rel(*rep.ratio, expected, 1e-12))
        r.fail(region + ": ratio differs from homes / population");
    } else if (rep.ratio) {
      r.fail(region + ": ratio present for zero population");
    }
  }
  return r;
}

}  // namespace tripcast
