#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tripcast/domain.h"
#include "tripcast/geo.h"

namespace testing_support {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("tripcast_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline tripcast::Polygon rect(double x0, double y0, double x1, double y1) {
  return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}, {}};
}

inline tripcast::Zone rect_zone(const std::string& id, double x0, double y0, double x1, double y1,
                                const std::string& county = "C1") {
  tripcast::Zone z;
  z.zone_id = id;
  z.geometry = {rect(x0, y0, x1, y1)};
  z.centroid = {(x0 + x1) / 2, (y0 + y1) / 2};
  z.county_id = county;
  return z;
}

inline tripcast::Ping ping(const std::string& device, double lon, double lat, std::int64_t t,
                           double accuracy = 5.0) {
  return {device, lon, lat, t, accuracy};
}

// Meters to degrees near a latitude (small offsets only).
inline double dlat_m(double m) { return m / 111195.08; }
inline double dlon_m(double m, double lat) {
  return m / (111195.08 * std::cos(lat * 3.14159265358979323846 / 180.0));
}

}  // namespace testing_support
