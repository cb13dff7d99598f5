#pragma once

#include <span>
#include <vector>

namespace tripcast {

// Mean Earth radius in meters.
inline constexpr double kEarthRadiusM = 6371008.8;

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;

  friend bool operator==(const LonLat&, const LonLat&) = default;
};

/// Great-circle distance in meters (haversine).
double haversine_m(const LonLat& a, const LonLat& b);

/// Arithmetic mean of lon and lat separately. Requires a non-empty span.
LonLat mean_point(std::span<const LonLat> points);

/// Median of a sample; even-length samples average the two middle order
/// statistics. The input is copied. Empty input throws std::invalid_argument.
double median(std::span<const double> values);
double mean(std::span<const double> values);

using Ring = std::vector<LonLat>;

// Outer ring plus holes, in lon/lat degrees. Rings are stored closed
// (first == last).
struct Polygon {
  Ring outer;
  std::vector<Ring> holes;

  friend bool operator==(const Polygon&, const Polygon&) = default;
};

struct BoundingBox {
  double min_lon = 0.0;
  double min_lat = 0.0;
  double max_lon = 0.0;
  double max_lat = 0.0;

  bool contains(const LonLat& p) const {
    return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat &&
           p.lat <= max_lat;
  }
};

BoundingBox bounding_box(const Ring& ring);
BoundingBox bounding_box(std::span<const Polygon> parts);

/// Signed shoelace area in squared degrees (positive for counter-clockwise).
double signed_area_deg2(const Ring& ring);

/// Area-weighted centroid of the parts, holes subtracted, computed in the
/// planar lon/lat frame.
LonLat polygon_centroid(std::span<const Polygon> parts);

/// Approximate surface area in square kilometers using a local
/// equirectangular scaling at each ring's mean latitude.
double polygon_area_km2(std::span<const Polygon> parts);

bool ring_is_closed(const Ring& ring);
bool ring_self_intersects(const Ring& ring);

/// True when p lies on any edge of the ring (within a tiny tolerance).
bool on_ring_boundary(const Ring& ring, const LonLat& p);

/// Even-odd crossing test against a single ring; boundary points are not
/// classified (use on_ring_boundary first).
bool ring_crossing_parity(const Ring& ring, const LonLat& p);

/// Point-in-polygon: even-odd over the outer ring and holes, with points on
/// any ring boundary counted as inside.
bool polygon_contains(const Polygon& poly, const LonLat& p);

}  // namespace tripcast
