#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tripcast/domain.h"

namespace tripcast {

// ---------------------------------------------------------------------------
// Pings

enum class PingFormat { kCsv, kNdjson };

PingFormat ping_format_from_path(const std::string& path);

struct RejectedRow {
  std::size_t line = 0;  // 1-based
  std::string reason;
  std::string raw;
};

struct PingParseResult {
  std::vector<Ping> pings;
  std::size_t rejected = 0;
  std::vector<RejectedRow> samples;  // first max_samples rejections
};

/// Parses a ping stream. CSV needs the header device_id,lon,lat,timestamp,accuracy;
/// NDJSON objects carry those field names. Malformed rows are counted and the
/// first `max_samples` are kept with their reason. Throws DataError when the
/// stream itself cannot be read or the CSV header is wrong.
PingParseResult parse_pings(std::istream& in, PingFormat format,
                            std::size_t max_samples = 100);

void write_pings(std::ostream& out, std::span<const Ping> pings, PingFormat format);

// ---------------------------------------------------------------------------
// Zones

enum class ZoneConstruction { kPerFeature, kPerPart };

struct ZoneLoadOptions {
  ZoneConstruction construction = ZoneConstruction::kPerFeature;
  std::string zone_id_property = "zone_id";
  std::string county_id_property = "county_id";
};

/// Read-only spatial lookup over zone polygons (R-tree over part bounding
/// boxes). Boundary hits resolve to the lexicographically lowest zone_id.
class ZoneIndex {
 public:
  explicit ZoneIndex(std::vector<Zone> zones);
  ~ZoneIndex();
  ZoneIndex(ZoneIndex&&) noexcept;
  ZoneIndex& operator=(ZoneIndex&&) noexcept;

  const std::vector<Zone>& zones() const { return zones_; }
  std::size_t size() const { return zones_.size(); }

  /// Ordered zone ids (load order); matrices are indexed by this order.
  std::vector<std::string> zone_ids() const;

  std::optional<std::size_t> position(const std::string& zone_id) const;
  const Zone& zone(std::size_t pos) const { return zones_[pos]; }

  /// Position of the containing zone, or nullopt when outside all zones.
  std::optional<std::size_t> locate(const LonLat& p) const;

 private:
  struct Tree;
  std::vector<Zone> zones_;
  std::map<std::string, std::size_t> by_id_;
  std::unique_ptr<Tree> tree_;
};

/// Zone id containing the point, or nullopt.
std::optional<std::string> assign_zone(const LonLat& point, const ZoneIndex& index);

/// Builds zones from a GeoJSON FeatureCollection. Throws DataError on a
/// missing id property (with the feature index), an invalid ring, or a
/// duplicate zone id.
std::vector<Zone> load_zones(const nlohmann::json& doc, const ZoneLoadOptions& options = {});
std::vector<Zone> load_zones_file(const std::string& path,
                                  const ZoneLoadOptions& options = {});

/// Writes zones as a GeoJSON FeatureCollection carrying zone_id/county_id and
/// any extra per-zone numeric properties.
nlohmann::json zones_to_geojson(
    std::span<const Zone> zones,
    const std::map<std::string, std::map<std::string, double>>& properties = {});

// ---------------------------------------------------------------------------
// Socioeconomic attribute tables

/// Maps a raw header name to its canonical attribute name (case-insensitive,
/// see the alias table in ingest.cpp). Returns nullopt for unknown columns.
std::optional<std::string> canonical_attribute_name(const std::string& header);

// Raw employment counts accepted in SEA tables and converted to percentages
// by normalize_sea.
namespace raw_attr {
inline constexpr const char* kEmployed = "employed";
inline constexpr const char* kPopGovQuarters = "pop_gov_quarters";
inline constexpr const char* kEmpAgcon = "emp_agcon";
inline constexpr const char* kEmpIndustry = "emp_industry";
inline constexpr const char* kEmpRetail = "emp_retail";
inline constexpr const char* kEmpFoodLodging = "emp_foodlodging";
inline constexpr const char* kEmpProSrv = "emp_prosrv";
inline constexpr const char* kEmpGovnmt = "emp_govnmt";
inline constexpr const char* kEmpOthSrv = "emp_othsrv";
}  // namespace raw_attr

struct SeaLoadResult {
  std::vector<SeaRecord> records;
  std::vector<RejectedRow> rejected;
  // Zones known from geometry but absent from the table.
  std::vector<std::string> missing_zones;
  std::vector<std::string> ignored_columns;
};

/// Loads one year's SEA table (keyed by zone_id). When a `year` column is
/// present only rows of the requested year are kept.
SeaLoadResult load_sea(std::istream& in, int year,
                       std::span<const std::string> known_zones = {});
SeaLoadResult load_sea_file(const std::string& path, int year,
                            std::span<const std::string> known_zones = {});

void write_sea(std::ostream& out, std::span<const SeaRecord> records);

/// Population by region (CSV columns county_id, population).
std::map<std::string, std::int64_t> load_population(std::istream& in);
std::map<std::string, std::int64_t> load_population_file(const std::string& path);

}  // namespace tripcast
