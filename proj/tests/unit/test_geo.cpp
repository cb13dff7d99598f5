#include <gtest/gtest.h>

#include <random>

#include "../oracles/oracles.h"
#include "../support/support.h"
#include "tripcast/geo.h"

using namespace tripcast;
using testing_support::rect;

TEST(Haversine, OneDegreeOfLatitude) {
  // pi/180 * 6371008.8
  EXPECT_NEAR(haversine_m({0, 0}, {0, 1}), 111195.0802, 1e-3);
}

TEST(Haversine, MatchesOracleAndIsSymmetric) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lon(-180, 180), lat(-89, 89);
  for (int i = 0; i < 500; ++i) {
    const LonLat a{lon(rng), lat(rng)}, b{lon(rng), lat(rng)};
    const double d = haversine_m(a, b);
    EXPECT_NEAR(d, oracle::haversine(a.lon, a.lat, b.lon, b.lat), 1e-6 * std::max(1.0, d));
    EXPECT_DOUBLE_EQ(d, haversine_m(b, a));
  }
  EXPECT_EQ(haversine_m({10, 20}, {10, 20}), 0.0);
}

TEST(Median, OddAndEvenCounts) {
  const std::vector<double> odd{1800, 600, 1200};
  const std::vector<double> even{600, 1200};
  EXPECT_EQ(median(odd), 1200);
  EXPECT_EQ(median(even), 900);
  EXPECT_THROW(median(std::vector<double>{}), std::invalid_argument);
}

TEST(Polygon, UnitSquareCentroidAndArea) {
  const std::vector<Polygon> sq{rect(0, 0, 1, 1)};
  const auto c = polygon_centroid(sq);
  EXPECT_NEAR(c.lon, 0.5, 1e-12);
  EXPECT_NEAR(c.lat, 0.5, 1e-12);
  EXPECT_NEAR(signed_area_deg2(sq[0].outer), 1.0, 1e-12);
}

TEST(Polygon, HoleExcluded) {
  Polygon p = rect(0, 0, 4, 4);
  p.holes.push_back(rect(1, 1, 2, 2).outer);
  EXPECT_TRUE(polygon_contains(p, {3, 3}));
  EXPECT_FALSE(polygon_contains(p, {1.5, 1.5}));
  // Hole boundary counts as inside.
  EXPECT_TRUE(polygon_contains(p, {1, 1.5}));
}

TEST(Polygon, ContainsMatchesRayCastingOracle) {
  // Irregular concave ring.
  const Ring ring{{0, 0}, {5, 0}, {5, 4}, {3, 1.5}, {2.2, 3.7}, {0, 4}, {0, 0}};
  const Polygon poly{ring, {}};
  std::vector<std::pair<double, double>> oracle_ring;
  for (const auto& p : ring) oracle_ring.emplace_back(p.lon, p.lat);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 6);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const LonLat p{u(rng), u(rng)};
    if (on_ring_boundary(ring, p)) continue;
    EXPECT_EQ(polygon_contains(poly, p), oracle::in_ring(oracle_ring, p.lon, p.lat))
        << p.lon << "," << p.lat;
    ++checked;
  }
  EXPECT_GT(checked, 990);
}

TEST(Ring, SelfIntersectionDetected) {
  const Ring bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}, {0, 0}};
  EXPECT_TRUE(ring_self_intersects(bowtie));
  EXPECT_FALSE(ring_self_intersects(rect(0, 0, 1, 1).outer));
  EXPECT_TRUE(ring_is_closed(bowtie));
}
