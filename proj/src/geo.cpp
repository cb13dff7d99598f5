#include "tripcast/geo.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tripcast {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kBoundaryEps = 1e-12;

double cross(const LonLat& o, const LonLat& a, const LonLat& b) {
  return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
}

bool on_segment(const LonLat& a, const LonLat& b, const LonLat& p) {
  const double scale = std::max({std::abs(a.lon), std::abs(a.lat), std::abs(b.lon),
                                 std::abs(b.lat), 1.0});
  if (std::abs(cross(a, b, p)) > kBoundaryEps * scale * scale) return false;
  return p.lon >= std::min(a.lon, b.lon) - kBoundaryEps &&
         p.lon <= std::max(a.lon, b.lon) + kBoundaryEps &&
         p.lat >= std::min(a.lat, b.lat) - kBoundaryEps &&
         p.lat <= std::max(a.lat, b.lat) + kBoundaryEps;
}

int orientation(const LonLat& a, const LonLat& b, const LonLat& c) {
  const double v = cross(a, b, c);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool segments_intersect(const LonLat& p1, const LonLat& p2, const LonLat& q1,
                        const LonLat& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

// Centroid accumulation for one ring: returns (signed area, Σ cx, Σ cy).
struct RingMoments {
  double area = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

RingMoments ring_moments(const Ring& ring) {
  RingMoments m;
  if (ring.size() < 3) return m;
  // Translate to the first vertex to limit cancellation.
  const LonLat o = ring.front();
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const double x0 = ring[i].lon - o.lon, y0 = ring[i].lat - o.lat;
    const double x1 = ring[i + 1].lon - o.lon, y1 = ring[i + 1].lat - o.lat;
    const double c = x0 * y1 - x1 * y0;
    m.area += c;
    m.cx += (x0 + x1) * c;
    m.cy += (y0 + y1) * c;
  }
  m.area *= 0.5;
  // Convert to absolute coordinates: Σ over triangles of area·centroid.
  m.cx = m.cx / 6.0 + m.area * o.lon;
  m.cy = m.cy / 6.0 + m.area * o.lat;
  return m;
}

double ring_area_km2(const Ring& ring) {
  if (ring.size() < 4) return 0.0;
  double lat_sum = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) lat_sum += ring[i].lat;
  const double mean_lat = lat_sum / static_cast<double>(ring.size() - 1);
  const double kx = kEarthRadiusM * kDegToRad * std::cos(mean_lat * kDegToRad);
  const double ky = kEarthRadiusM * kDegToRad;
  return std::abs(signed_area_deg2(ring)) * kx * ky / 1e6;
}

}  // namespace

double haversine_m(const LonLat& a, const LonLat& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

LonLat mean_point(std::span<const LonLat> points) {
  if (points.empty()) throw std::invalid_argument("mean_point: no points");
  double lon = 0.0, lat = 0.0;
  for (const auto& p : points) {
    lon += p.lon;
    lat += p.lat;
  }
  const double n = static_cast<double>(points.size());
  return {lon / n, lat / n};
}

double median(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty sample");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double x : values) s += x;
  return s / static_cast<double>(values.size());
}

BoundingBox bounding_box(const Ring& ring) {
  BoundingBox b{INFINITY, INFINITY, -INFINITY, -INFINITY};
  for (const auto& p : ring) {
    b.min_lon = std::min(b.min_lon, p.lon);
    b.min_lat = std::min(b.min_lat, p.lat);
    b.max_lon = std::max(b.max_lon, p.lon);
    b.max_lat = std::max(b.max_lat, p.lat);
  }
  return b;
}

BoundingBox bounding_box(std::span<const Polygon> parts) {
  BoundingBox b{INFINITY, INFINITY, -INFINITY, -INFINITY};
  for (const auto& part : parts) {
    const BoundingBox r = bounding_box(part.outer);
    b.min_lon = std::min(b.min_lon, r.min_lon);
    b.min_lat = std::min(b.min_lat, r.min_lat);
    b.max_lon = std::max(b.max_lon, r.max_lon);
    b.max_lat = std::max(b.max_lat, r.max_lat);
  }
  return b;
}

double signed_area_deg2(const Ring& ring) { return ring_moments(ring).area; }

LonLat polygon_centroid(std::span<const Polygon> parts) {
  double area = 0.0, cx = 0.0, cy = 0.0;
  for (const auto& part : parts) {
    auto add = [&](const Ring& ring, double sign) {
      RingMoments m = ring_moments(ring);
      // Orientation-independent: outer rings add, holes subtract.
      const double s = (m.area < 0 ? -1.0 : 1.0) * sign;
      area += s * m.area;
      cx += s * m.cx;
      cy += s * m.cy;
    };
    add(part.outer, 1.0);
    for (const auto& hole : part.holes) add(hole, -1.0);
  }
  if (area == 0.0) {
    std::vector<LonLat> pts;
    for (const auto& part : parts)
      pts.insert(pts.end(), part.outer.begin(), part.outer.end());
    return mean_point(pts);
  }
  return {cx / area, cy / area};
}

double polygon_area_km2(std::span<const Polygon> parts) {
  double total = 0.0;
  for (const auto& part : parts) {
    total += ring_area_km2(part.outer);
    for (const auto& hole : part.holes) total -= ring_area_km2(hole);
  }
  return total;
}

bool ring_is_closed(const Ring& ring) {
  return ring.size() >= 4 && ring.front() == ring.back();
}

bool ring_self_intersects(const Ring& ring) {
  const std::size_t m = ring.size() < 2 ? 0 : ring.size() - 1;  // edge count
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == m - 1);
      if (adjacent) {
        // Adjacent edges share a vertex; they only conflict if they overlap
        // collinearly beyond it.
        const LonLat& a = ring[i];
        const LonLat& b = ring[i + 1];
        const LonLat& c = ring[j];
        const LonLat& d = ring[j + 1];
        if (orientation(a, b, c) == 0 && orientation(a, b, d) == 0) {
          const LonLat& shared = (j == i + 1) ? b : a;
          const LonLat& far_i = (j == i + 1) ? a : b;
          const LonLat& far_j = (j == i + 1) ? d : c;
          const double dot = (far_i.lon - shared.lon) * (far_j.lon - shared.lon) +
                             (far_i.lat - shared.lat) * (far_j.lat - shared.lat);
          if (dot > 0) return true;
        }
        continue;
      }
      if (segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1])) return true;
    }
  }
  return false;
}

bool on_ring_boundary(const Ring& ring, const LonLat& p) {
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    if (on_segment(ring[i], ring[i + 1], p)) return true;
  }
  return false;
}

bool ring_crossing_parity(const Ring& ring, const LonLat& p) {
  bool inside = false;
  for (std::size_t i = 0, n = ring.size(); i + 1 < n; ++i) {
    const LonLat& a = ring[i];
    const LonLat& b = ring[i + 1];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
      if (p.lon < x) inside = !inside;
    }
  }
  return inside;
}

bool polygon_contains(const Polygon& poly, const LonLat& p) {
  if (on_ring_boundary(poly.outer, p)) return true;
  for (const auto& hole : poly.holes)
    if (on_ring_boundary(hole, p)) return true;
  bool inside = ring_crossing_parity(poly.outer, p);
  for (const auto& hole : poly.holes)
    if (ring_crossing_parity(hole, p)) inside = !inside;
  return inside;
}

}  // namespace tripcast
