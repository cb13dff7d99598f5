#include "tripcast/ingest.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "tripcast/csv.h"
#include "tripcast/error.h"

namespace tripcast {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace {

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    if (c < 0x80) {
      len = 1;
    } else if ((c >> 5) == 0x6) {
      len = 2;
    } else if ((c >> 4) == 0xE) {
      len = 3;
    } else if ((c >> 3) == 0x1E) {
      len = 4;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k)
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    i += len;
  }
  return true;
}

const std::vector<std::string> kPingColumns = {"device_id", "lon", "lat", "timestamp",
                                               "accuracy"};

// Returns the rejection reason, or empty when the ping is valid.
std::string check_ping(const Ping& p) {
  if (p.device_id.empty()) return "empty device_id";
  ValidationResult v = validate(p);
  return v.ok() ? std::string() : v.violations.front();
}

std::string parse_csv_ping(const std::string& line, Ping& out) {
  auto fields = csv::split_line(line);
  if (fields.size() != kPingColumns.size())
    return "expected 5 fields, got " + std::to_string(fields.size());
  out.device_id = std::string(csv::trim(fields[0]));
  auto lon = csv::parse_double(fields[1]);
  if (!lon) return "non-numeric lon";
  auto lat = csv::parse_double(fields[2]);
  if (!lat) return "non-numeric lat";
  auto ts = csv::parse_int64(fields[3]);
  if (!ts) {
    return csv::parse_double(fields[3]) ? "non-integer timestamp" : "non-numeric timestamp";
  }
  auto acc = csv::parse_double(fields[4]);
  if (!acc) return "non-numeric accuracy";
  out.lon = *lon;
  out.lat = *lat;
  out.timestamp = *ts;
  out.accuracy = *acc;
  return check_ping(out);
}

std::string parse_ndjson_ping(const std::string& line, Ping& out) {
  nlohmann::json obj = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded()) return "malformed JSON";
  if (!obj.is_object()) return "JSON row is not an object";
  for (const auto& key : kPingColumns)
    if (!obj.contains(key)) return "missing " + key;
  const auto& id = obj["device_id"];
  if (id.is_string()) {
    out.device_id = id.get<std::string>();
  } else if (id.is_number_integer()) {
    out.device_id = id.dump();
  } else {
    return "non-string device_id";
  }
  for (const char* key : {"lon", "lat", "accuracy"}) {
    if (!obj[key].is_number()) return std::string("non-numeric ") + key;
  }
  const auto& ts = obj["timestamp"];
  if (!ts.is_number()) return "non-numeric timestamp";
  if (!ts.is_number_integer()) return "non-integer timestamp";
  out.lon = obj["lon"].get<double>();
  out.lat = obj["lat"].get<double>();
  out.accuracy = obj["accuracy"].get<double>();
  out.timestamp = ts.get<std::int64_t>();
  return check_ping(out);
}

}  // namespace

PingFormat ping_format_from_path(const std::string& path) {
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() &&
           path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".ndjson") || ends_with(".jsonl") || ends_with(".json"))
    return PingFormat::kNdjson;
  return PingFormat::kCsv;
}

PingParseResult parse_pings(std::istream& in, PingFormat format, std::size_t max_samples) {
  if (!in) throw DataError("unreadable ping stream");
  PingParseResult result;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = format == PingFormat::kNdjson;
  auto reject = [&](std::string reason, const std::string& raw) {
    ++result.rejected;
    if (result.samples.size() < max_samples)
      result.samples.push_back({line_no, std::move(reason), raw});
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::trim(line).empty()) continue;
    if (!header_seen) {
      auto header = csv::split_line(line);
      if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
      for (auto& h : header) h = std::string(csv::trim(h));
      if (header != kPingColumns) {
        throw DataError(
            "ping CSV header must be device_id,lon,lat,timestamp,accuracy; got '" + line +
            "'");
      }
      header_seen = true;
      continue;
    }
    if (!valid_utf8(line)) {
      reject("invalid UTF-8", line);
      continue;
    }
    Ping p;
    std::string reason = format == PingFormat::kCsv ? parse_csv_ping(line, p)
                                                    : parse_ndjson_ping(line, p);
    if (!reason.empty()) {
      reject(std::move(reason), line);
      continue;
    }
    result.pings.push_back(std::move(p));
  }
  if (in.bad()) throw DataError("error while reading ping stream");
  return result;
}

void write_pings(std::ostream& out, std::span<const Ping> pings, PingFormat format) {
  if (format == PingFormat::kCsv) {
    csv::Writer w(out);
    w.row(kPingColumns);
    for (const auto& p : pings) {
      w.field(p.device_id).field(p.lon).field(p.lat).field(p.timestamp).field(p.accuracy);
      w.end_row();
    }
    return;
  }
  for (const auto& p : pings) {
    // Field order is fixed; numbers use the shortest round-trip form.
    out << "{\"device_id\":" << nlohmann::json(p.device_id).dump()
        << ",\"lon\":" << csv::format_double(p.lon)
        << ",\"lat\":" << csv::format_double(p.lat) << ",\"timestamp\":" << p.timestamp
        << ",\"accuracy\":" << csv::format_double(p.accuracy) << "}\n";
  }
}

// ---------------------------------------------------------------------------
// Zones

using BgPoint = bg::model::point<double, 2, bg::cs::cartesian>;
using BgBox = bg::model::box<BgPoint>;
using TreeValue = std::pair<BgBox, std::pair<std::size_t, std::size_t>>;  // (zone, part)

struct ZoneIndex::Tree {
  bgi::rtree<TreeValue, bgi::quadratic<16>> rtree;
};

ZoneIndex::ZoneIndex(std::vector<Zone> zones)
    : zones_(std::move(zones)), tree_(std::make_unique<Tree>()) {
  std::vector<TreeValue> values;
  for (std::size_t z = 0; z < zones_.size(); ++z) {
    if (!by_id_.emplace(zones_[z].zone_id, z).second)
      throw DataError("duplicate zone id '" + zones_[z].zone_id + "'");
    for (std::size_t part = 0; part < zones_[z].geometry.size(); ++part) {
      const BoundingBox b = bounding_box(zones_[z].geometry[part].outer);
      values.push_back({BgBox(BgPoint(b.min_lon, b.min_lat), BgPoint(b.max_lon, b.max_lat)),
                        {z, part}});
    }
  }
  tree_->rtree = bgi::rtree<TreeValue, bgi::quadratic<16>>(values.begin(), values.end());
}

ZoneIndex::~ZoneIndex() = default;
ZoneIndex::ZoneIndex(ZoneIndex&&) noexcept = default;
ZoneIndex& ZoneIndex::operator=(ZoneIndex&&) noexcept = default;

std::vector<std::string> ZoneIndex::zone_ids() const {
  std::vector<std::string> ids;
  ids.reserve(zones_.size());
  for (const auto& z : zones_) ids.push_back(z.zone_id);
  return ids;
}

std::optional<std::size_t> ZoneIndex::position(const std::string& zone_id) const {
  auto it = by_id_.find(zone_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ZoneIndex::locate(const LonLat& p) const {
  std::vector<TreeValue> hits;
  const BgPoint q(p.lon, p.lat);
  tree_->rtree.query(bgi::intersects(q), std::back_inserter(hits));
  std::optional<std::size_t> best;
  for (const auto& [box, id] : hits) {
    const auto [z, part] = id;
    if (best && zones_[z].zone_id >= zones_[*best].zone_id) continue;
    if (polygon_contains(zones_[z].geometry[part], p)) best = z;
  }
  return best;
}

std::optional<std::string> assign_zone(const LonLat& point, const ZoneIndex& index) {
  auto pos = index.locate(point);
  if (!pos) return std::nullopt;
  return index.zone(*pos).zone_id;
}

namespace {

std::string property_as_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<std::int64_t>(d)))
      return std::to_string(static_cast<std::int64_t>(d));
    return csv::format_double(d);
  }
  return {};
}

Ring parse_ring(const nlohmann::json& coords, std::size_t feature) {
  if (!coords.is_array())
    throw DataError("feature " + std::to_string(feature) + ": ring is not an array");
  Ring ring;
  ring.reserve(coords.size());
  for (const auto& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
      throw DataError("feature " + std::to_string(feature) + ": invalid position");
    ring.push_back({pos[0].get<double>(), pos[1].get<double>()});
  }
  if (!ring_is_closed(ring))
    throw DataError("feature " + std::to_string(feature) +
                    ": invalid ring (needs >= 4 positions and must be closed)");
  return ring;
}

Polygon parse_polygon(const nlohmann::json& rings, std::size_t feature) {
  if (!rings.is_array() || rings.empty())
    throw DataError("feature " + std::to_string(feature) + ": polygon without rings");
  Polygon poly;
  poly.outer = parse_ring(rings[0], feature);
  if (ring_self_intersects(poly.outer))
    throw DataError("feature " + std::to_string(feature) +
                    ": invalid ring (outer ring self-intersects)");
  for (std::size_t i = 1; i < rings.size(); ++i)
    poly.holes.push_back(parse_ring(rings[i], feature));
  return poly;
}

}  // namespace

std::vector<Zone> load_zones(const nlohmann::json& doc, const ZoneLoadOptions& options) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
    throw DataError("zones document is not a GeoJSON FeatureCollection");
  const auto& features = doc.at("features");
  std::vector<Zone> zones;
  std::set<std::string> seen;
  for (std::size_t f = 0; f < features.size(); ++f) {
    const auto& feature = features[f];
    const auto& props = feature.contains("properties") ? feature["properties"]
                                                       : nlohmann::json::object();
    std::string zone_id = props.is_object() && props.contains(options.zone_id_property)
                              ? property_as_string(props[options.zone_id_property])
                              : std::string();
    if (zone_id.empty())
      throw DataError("feature " + std::to_string(f) + ": missing property '" +
                      options.zone_id_property + "'");
    std::string county_id = props.contains(options.county_id_property)
                                ? property_as_string(props[options.county_id_property])
                                : std::string();
    if (county_id.empty())
      throw DataError("feature " + std::to_string(f) + ": missing property '" +
                      options.county_id_property + "'");
    const auto& geom = feature.at("geometry");
    const std::string type = geom.value("type", "");
    std::vector<Polygon> parts;
    if (type == "Polygon") {
      parts.push_back(parse_polygon(geom.at("coordinates"), f));
    } else if (type == "MultiPolygon") {
      for (const auto& poly : geom.at("coordinates")) parts.push_back(parse_polygon(poly, f));
    } else {
      throw DataError("feature " + std::to_string(f) + ": unsupported geometry type '" +
                      type + "'");
    }
    if (parts.empty())
      throw DataError("feature " + std::to_string(f) + ": empty geometry");

    auto emit = [&](std::string id, std::vector<Polygon> geometry) {
      if (!seen.insert(id).second) throw DataError("duplicate zone id '" + id + "'");
      Zone z;
      z.zone_id = std::move(id);
      z.centroid = polygon_centroid(geometry);
      z.geometry = std::move(geometry);
      z.county_id = county_id;
      zones.push_back(std::move(z));
    };
    if (options.construction == ZoneConstruction::kPerPart && parts.size() > 1) {
      for (std::size_t k = 0; k < parts.size(); ++k)
        emit(zone_id + "_" + std::to_string(k + 1), {parts[k]});
    } else {
      emit(zone_id, std::move(parts));
    }
  }
  return zones;
}

std::vector<Zone> load_zones_file(const std::string& path, const ZoneLoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open zones file '" + path + "'");
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw DataError("zones file '" + path + "' is not valid JSON");
  return load_zones(doc, options);
}

nlohmann::json zones_to_geojson(
    std::span<const Zone> zones,
    const std::map<std::string, std::map<std::string, double>>& properties) {
  auto ring_json = [](const Ring& ring) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : ring) arr.push_back({p.lon, p.lat});
    return arr;
  };
  nlohmann::json features = nlohmann::json::array();
  for (const auto& z : zones) {
    nlohmann::json polys = nlohmann::json::array();
    for (const auto& part : z.geometry) {
      nlohmann::json rings = nlohmann::json::array();
      rings.push_back(ring_json(part.outer));
      for (const auto& hole : part.holes) rings.push_back(ring_json(hole));
      polys.push_back(std::move(rings));
    }
    nlohmann::json geometry;
    if (polys.size() == 1) {
      geometry = {{"type", "Polygon"}, {"coordinates", polys[0]}};
    } else {
      geometry = {{"type", "MultiPolygon"}, {"coordinates", polys}};
    }
    nlohmann::json props = {{"zone_id", z.zone_id}, {"county_id", z.county_id}};
    if (auto it = properties.find(z.zone_id); it != properties.end()) {
      for (const auto& [k, v] : it->second) {
        if (std::isfinite(v)) {
          props[k] = v;
        } else {
          props[k] = nullptr;
        }
      }
    }
    features.push_back(
        {{"type", "Feature"}, {"properties", std::move(props)}, {"geometry", geometry}});
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

// ---------------------------------------------------------------------------
// SEA tables

namespace {

std::string normalize_header(std::string_view h) {
  std::string out;
  for (char c : csv::trim(h)) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

// alias (normalized) → canonical attribute name
const std::unordered_map<std::string, std::string>& alias_table() {
  static const std::unordered_map<std::string, std::string> table = [] {
    std::unordered_map<std::string, std::string> t;
    auto add = [&](const std::string& canonical, std::initializer_list<const char*> aliases) {
      t[canonical] = canonical;
      for (const char* a : aliases) t[a] = canonical;
    };
    add(attr::kTotalPopulation, {"population", "pop", "totpop", "tot_pop", "pop_total"});
    add(attr::kPopulationDensity, {"pop_density", "popden", "density", "pop_dens"});
    add(attr::kPctPopGovQuarters, {"pct_gov_quarters", "pct_gq", "gq_pct"});
    add(attr::kAvgHhIncome, {"hh_income", "income", "avg_income", "mean_hh_income"});
    add(attr::kAvgVehicles, {"vehicles", "avg_veh", "veh_per_hh", "avg_vehicles_per_hh"});
    add(attr::kPctEmployed, {"pct_emp", "employed_pct"});
    add(attr::kPctEmpAgcon, {"pct_agcon", "agcon_pct"});
    add(attr::kPctEmpIndustry, {"pct_industry", "pct_indust", "indust_pct"});
    add(attr::kPctEmpRetail, {"pct_retail", "retail_pct"});
    add(attr::kPctEmpFoodLodging, {"pct_foodlodging", "pct_foodld", "foodld_pct"});
    add(attr::kPctEmpProSrv, {"pct_prosrv", "prosrv_pct"});
    add(attr::kPctEmpGovnmt, {"pct_govnmt", "govnmt_pct"});
    add(attr::kPctEmpOthSrv, {"pct_othsrv", "othsrv_pct"});
    add(raw_attr::kEmployed, {"emp_total", "total_employment", "employment"});
    add(raw_attr::kPopGovQuarters, {"gq_pop", "gov_quarters_pop"});
    add(raw_attr::kEmpAgcon, {"agcon"});
    add(raw_attr::kEmpIndustry, {"indust", "industry"});
    add(raw_attr::kEmpRetail, {"retail"});
    add(raw_attr::kEmpFoodLodging, {"foodld", "foodlodging"});
    add(raw_attr::kEmpProSrv, {"prosrv"});
    add(raw_attr::kEmpGovnmt, {"govnmt"});
    add(raw_attr::kEmpOthSrv, {"othsrv"});
    return t;
  }();
  return table;
}

std::optional<std::size_t> find_column(const csv::Table& t,
                                       std::initializer_list<const char*> names) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    const std::string h = normalize_header(t.header[i]);
    for (const char* n : names)
      if (h == n) return i;
  }
  return std::nullopt;
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string s;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) s.push_back(',');
    s += csv::escape(fields[i]);
  }
  return s;
}

}  // namespace

std::optional<std::string> canonical_attribute_name(const std::string& header) {
  const auto& table = alias_table();
  auto it = table.find(normalize_header(header));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

SeaLoadResult load_sea(std::istream& in, int year, std::span<const std::string> known_zones) {
  const csv::Table t = csv::read(in);
  SeaLoadResult result;
  auto zone_col = find_column(t, {"zone_id", "taz", "taz_id", "zone"});
  if (!zone_col) throw DataError("SEA table: missing zone_id column");
  auto year_col = find_column(t, {"year"});

  std::vector<std::pair<std::size_t, std::string>> columns;  // (position, canonical)
  std::set<std::string> canonical_seen;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i == *zone_col || (year_col && i == *year_col)) continue;
    auto name = canonical_attribute_name(t.header[i]);
    if (!name || !canonical_seen.insert(*name).second) {
      result.ignored_columns.push_back(t.header[i]);
      continue;
    }
    columns.emplace_back(i, *name);
  }

  std::set<std::string> zones_seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t line = t.line_numbers[r];
    auto reject = [&](std::string reason) {
      result.rejected.push_back({line, std::move(reason), join_row(row)});
    };
    if (row.size() != t.header.size()) {
      reject("expected " + std::to_string(t.header.size()) + " fields");
      continue;
    }
    if (year_col) {
      auto y = csv::parse_int64(row[*year_col]);
      if (!y) {
        reject("non-numeric year");
        continue;
      }
      if (*y != year) continue;
    }
    SeaRecord rec;
    rec.zone_id = std::string(csv::trim(row[*zone_col]));
    rec.year = year;
    if (rec.zone_id.empty()) {
      reject("empty zone_id");
      continue;
    }
    std::string bad;
    for (const auto& [pos, name] : columns) {
      const auto text = csv::trim(row[pos]);
      if (text.empty() || text == "NA" || text == "NaN" || text == "nan") {
        rec.attributes.emplace_back(name, std::nullopt);
        continue;
      }
      auto v = csv::parse_double(text);
      if (!v) {
        bad = "non-numeric " + name;
        break;
      }
      rec.attributes.emplace_back(name, *v);
    }
    if (!bad.empty()) {
      reject(std::move(bad));
      continue;
    }
    for (const char* raw : {raw_attr::kEmployed, raw_attr::kPopGovQuarters, raw_attr::kEmpAgcon,
                            raw_attr::kEmpIndustry, raw_attr::kEmpRetail,
                            raw_attr::kEmpFoodLodging, raw_attr::kEmpProSrv,
                            raw_attr::kEmpGovnmt, raw_attr::kEmpOthSrv}) {
      if (auto v = rec.get(raw); v && *v < 0) bad = std::string("negative ") + raw;
    }
    ValidationResult v = validate(rec);
    if (!v.ok()) bad = v.violations.front();
    if (!bad.empty()) {
      reject(std::move(bad));
      continue;
    }
    if (!zones_seen.insert(rec.zone_id).second) {
      reject("duplicate zone " + rec.zone_id);
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  for (const auto& z : known_zones)
    if (!zones_seen.count(z)) result.missing_zones.push_back(z);
  return result;
}

SeaLoadResult load_sea_file(const std::string& path, int year,
                            std::span<const std::string> known_zones) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open SEA table '" + path + "'");
  return load_sea(in, year, known_zones);
}

void write_sea(std::ostream& out, std::span<const SeaRecord> records) {
  csv::Writer w(out);
  std::vector<std::string> names;
  if (!records.empty())
    for (const auto& [name, value] : records.front().attributes) names.push_back(name);
  w.field("zone_id").field("year");
  for (const auto& n : names) w.field(n);
  w.end_row();
  for (const auto& rec : records) {
    w.field(rec.zone_id).field(rec.year);
    for (const auto& n : names) {
      auto v = rec.get(n);
      if (v) {
        w.field(*v);
      } else {
        w.blank();
      }
    }
    w.end_row();
  }
}

std::map<std::string, std::int64_t> load_population(std::istream& in) {
  const csv::Table t = csv::read(in);
  auto region = find_column(t, {"county_id", "region_id", "county", "region"});
  auto pop = find_column(t, {"population", "total_population", "pop"});
  if (!region || !pop) throw DataError("population table needs county_id and population");
  std::map<std::string, std::int64_t> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = "population table line " + std::to_string(t.line_numbers[r]);
    if (row.size() != t.header.size()) throw DataError(where + ": wrong field count");
    auto v = csv::parse_double(row[*pop]);
    if (!v || *v < 0 || *v != static_cast<double>(static_cast<std::int64_t>(*v)))
      throw DataError(where + ": population must be a non-negative integer");
    const std::string id(csv::trim(row[*region]));
    if (!out.emplace(id, static_cast<std::int64_t>(*v)).second)
      throw DataError(where + ": duplicate region '" + id + "'");
  }
  return out;
}

std::map<std::string, std::int64_t> load_population_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open population table '" + path + "'");
  return load_population(in);
}

}  // namespace tripcast
