#include <gtest/gtest.h>

#include <random>

#include "../oracles/oracles.h"
#include "../support/support.h"
#include "tripcast/error.h"
#include "tripcast/matrices.h"

using namespace tripcast;
using testing_support::rect_zone;

namespace {

ZoneIndex three_zones() {
  return ZoneIndex({rect_zone("Z1", 0, 0, 0.01, 0.01), rect_zone("Z2", 0.01, 0, 0.02, 0.01),
                    rect_zone("Z3", 0.05, 0, 0.06, 0.01)});
}

Trip trip(LonLat from, LonLat to, double weight, double tt = 600, double len = 1000,
          DayType day = DayType::kWeekday) {
  Trip t;
  t.device_id = "d";
  t.origin_stay.centroid = from;
  t.dest_stay.centroid = to;
  t.travel_time = tt;
  t.path_length = len;
  t.weight = weight;
  t.day_type = day;
  return t;
}

const LonLat kIn1{0.005, 0.005}, kIn2{0.015, 0.005}, kIn3{0.055, 0.005}, kOut{1, 1};

}  // namespace

TEST(Odm, WeightedSum) {
  const auto idx = three_zones();
  const std::vector<Trip> trips{trip(kIn1, kIn2, 2.5), trip(kIn1, kIn2, 2.5), trip(kIn1, kOut, 1),
                                trip(kIn2, kIn1, 1, 600, 1000, DayType::kWeekend)};
  const auto r = build_odm(trips, idx, DayType::kWeekday, 2021, 1);
  EXPECT_DOUBLE_EQ(r.odm.cells(0, 1), 5.0);
  EXPECT_EQ(r.diagnostics.outside_zones, 1);
  EXPECT_EQ(r.diagnostics.other_day_type, 1);
  EXPECT_EQ(r.diagnostics.included, 2);
  EXPECT_DOUBLE_EQ(r.odm.cells.sum(), 5.0);
  EXPECT_TRUE(validate(r.odm).ok());
}

TEST(Odm, DividesByObservedDays) {
  const auto idx = three_zones();
  std::vector<Trip> trips;
  double total = 0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> w(0.5, 4);
  const LonLat pts[] = {kIn1, kIn2, kIn3};
  for (int i = 0; i < 200; ++i) {
    trips.push_back(trip(pts[i % 3], pts[(i / 3) % 3], w(rng)));
    total += trips.back().weight;
  }
  const auto r = build_odm(trips, idx, DayType::kWeekday, 2021, 10);
  EXPECT_NEAR(r.odm.cells.sum(), total / 10, 1e-9);
  EXPECT_THROW(build_odm(trips, idx, DayType::kWeekday, 2021, 0), DataError);
}

TEST(Odm, PartitionedAccumulatorsMerge) {
  const auto idx = three_zones();
  OdmAccumulator a(idx, DayType::kWeekday), b(idx, DayType::kWeekday), all(idx, DayType::kWeekday);
  const std::vector<Trip> trips{trip(kIn1, kIn2, 1), trip(kIn3, kIn2, 2), trip(kIn3, kIn3, 4)};
  a.add(trips[0]);
  b.add(trips[1]);
  b.add(trips[2]);
  for (const auto& t : trips) all.add(t);
  a.merge(b);
  EXPECT_EQ(a.finish(2021, 2).cells, all.finish(2021, 2).cells);
}

TEST(Marginals, Examples) {
  const auto [p, a] = odm_marginals(Eigen::MatrixXd{{1, 2}, {3, 4}});
  EXPECT_EQ(p, Eigen::Vector2d(3, 7));
  EXPECT_EQ(a, Eigen::Vector2d(4, 6));
  const auto [pz, az] = odm_marginals(Eigen::MatrixXd::Zero(3, 3));
  EXPECT_EQ(pz.sum(), 0);
  EXPECT_EQ(az.sum(), 0);
}

TEST(Marginals, MatchDoubleLoop) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Random(10, 10).cwiseAbs() * 50;
  const auto [p, a] = odm_marginals(m);
  for (int i = 0; i < 10; ++i) {
    double row = 0, col = 0;
    for (int j = 0; j < 10; ++j) {
      row += m(i, j);
      col += m(j, i);
    }
    EXPECT_NEAR(p(i), row, 1e-12);
    EXPECT_NEAR(a(i), col, 1e-12);
  }
}

TEST(CostMatrix, MedianOddAndEven) {
  const auto idx = three_zones();
  const std::vector<Trip> odd{trip(kIn1, kIn2, 1, 600), trip(kIn1, kIn2, 1, 1200),
                              trip(kIn1, kIn2, 1, 1800)};
  const std::vector<Trip> even{trip(kIn1, kIn2, 1, 600), trip(kIn1, kIn2, 1, 1200)};
  const CostAggregation tt{CostStatistic::kMedian, CostMeasure::kTravelTime};
  EXPECT_EQ(build_cost_matrix(odd, idx, tt).cells(0, 1), 1200);
  const auto c = build_cost_matrix(even, idx, tt);
  EXPECT_EQ(c.cells(0, 1), 900);
  EXPECT_EQ(c.source(0, 1), CellSource::kObserved);
  const CostAggregation mean{CostStatistic::kMean, CostMeasure::kTravelTime};
  EXPECT_EQ(build_cost_matrix(odd, idx, mean).cells(0, 1), 1200);
}

TEST(CostMatrix, DistanceFallbackIsCentroidHaversine) {
  const auto idx = three_zones();
  const std::vector<Trip> trips{trip(kIn1, kIn2, 1, 600, 1500)};
  const auto c = build_cost_matrix(trips, idx, {});
  const auto& z1 = idx.zone(0).centroid;
  const auto& z3 = idx.zone(2).centroid;
  EXPECT_NEAR(c.cells(0, 2), oracle::haversine(z1.lon, z1.lat, z3.lon, z3.lat), 1e-6);
  EXPECT_EQ(c.source(0, 2), CellSource::kFallback);
  EXPECT_EQ(c.cells(0, 1), 1500);
  EXPECT_TRUE(validate(c).ok());
  EXPECT_GE(c.cells.minCoeff(), 1.0);
}

TEST(CostMatrix, TimeFallbackUsesMeanSpeed) {
  const auto idx = three_zones();
  const std::vector<Trip> trips{trip(kIn1, kIn2, 1, 100, 1000), trip(kIn2, kIn1, 1, 300, 1000)};
  const CostAggregation tt{CostStatistic::kMedian, CostMeasure::kTravelTime};
  const auto c = build_cost_matrix(trips, idx, tt);
  const auto& z1 = idx.zone(0).centroid;
  const auto& z3 = idx.zone(2).centroid;
  EXPECT_NEAR(c.cells(0, 2), oracle::haversine(z1.lon, z1.lat, z3.lon, z3.lat) / 5.0, 1e-6);
}

TEST(CostMatrix, CsvRoundTrip) {
  const auto idx = three_zones();
  const std::vector<Trip> trips{trip(kIn1, kIn2, 1, 600, 1234.5)};
  const auto c = build_cost_matrix(trips, idx, {});
  std::stringstream s;
  write_cost_matrix(s, c);
  const auto back = read_cost_matrix(s, idx.zone_ids(), c.aggregation);
  EXPECT_EQ(back.cells, c.cells);
  EXPECT_EQ(back.provenance, c.provenance);
}

TEST(Odm, CsvRoundTrip) {
  const auto idx = three_zones();
  const std::vector<Trip> trips{trip(kIn1, kIn2, 1.0 / 3), trip(kIn3, kIn1, 2)};
  const auto odm = build_odm(trips, idx, DayType::kWeekday, 2021, 3).odm;
  std::stringstream s;
  write_odm(s, odm);
  const auto back = read_odm(s, idx.zone_ids(), DayType::kWeekday, 2021);
  EXPECT_EQ(back.cells, odm.cells);
}

TEST(ObservedDays, CountsCalendarDays) {
  const TimeZone tz("America/Indiana/Indianapolis");
  // Monday 2021-06-07 through Sunday 2021-06-20.
  const auto d = count_observed_days(tz.to_unix(2021, 6, 7, 0, 5), tz.to_unix(2021, 6, 20, 23), tz);
  EXPECT_EQ(d.weekday, 10);
  EXPECT_EQ(d.weekend, 4);
}
