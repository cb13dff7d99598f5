#include <gtest/gtest.h>

#include <algorithm>

#include "../support/support.h"
#include "tripcast/domain.h"

using namespace tripcast;

namespace {

bool mentions(const ValidationResult& r, const std::string& text) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const std::string& v) { return v.find(text) != std::string::npos; });
}

Trip good_trip() {
  Trip t;
  t.device_id = "d1";
  t.origin_stay = {"d1", {-86.1, 39.7}, 1000, 2000, 3};
  t.dest_stay = {"d1", {-86.0, 39.8}, 2600, 4000, 4};
  t.depart = 2000;
  t.arrive = 2600;
  t.travel_time = 600;
  t.path_length = 16000;
  return t;
}

}  // namespace

TEST(Validate, PingLatitudeOutOfRange) {
  const auto r = validate(testing_support::ping("d1", -86.9, 95, 1623067200));
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "lat out of range"));
  EXPECT_TRUE(validate(testing_support::ping("d1", -86.9, 40.4, 1623067200)).ok());
}

TEST(Validate, OdMatrixMarginalMismatch) {
  ODMatrix m;
  m.zone_ids = {"Z1", "Z2"};
  m.cells = Eigen::MatrixXd{{1, 2}, {3, 4}};
  m.refresh_marginals();
  EXPECT_TRUE(validate(m).ok());
  m.production(0) += 1;
  EXPECT_TRUE(mentions(validate(m), "marginal mismatch"));
}

TEST(Validate, WellFormedTripPasses) {
  EXPECT_TRUE(validate(good_trip()).ok());
  auto t = good_trip();
  t.travel_time = 601;
  EXPECT_FALSE(validate(t).ok());
}

TEST(Validate, StayShorterThanMinimum) {
  const StayPoint s{"d1", {0, 0}, 0, 300, 3};
  EXPECT_FALSE(validate(s).ok());
  EXPECT_TRUE(validate(s, 300).ok());
}

TEST(Validate, GravityGridMustIncrease) {
  GravityModel g;
  g.beta = 1.0;
  g.grid = {0.1, 0.3, 0.2};
  g.mse = {1, 2, 3};
  EXPECT_FALSE(validate(g).ok());
  g.grid = {0.1, 0.2, 0.3};
  EXPECT_TRUE(validate(g).ok());
}

TEST(GroupByDevice, StableTimeSort) {
  const std::vector<Ping> pings{testing_support::ping("b", 0, 0, 5),
                                testing_support::ping("a", 0, 0, 9),
                                testing_support::ping("a", 1, 1, 3),
                                testing_support::ping("a", 2, 2, 3)};
  const auto g = group_by_device(pings);
  ASSERT_EQ(g.size(), 2u);
  const auto& a = g.at("a");
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0].lon, 1);
  EXPECT_EQ(a[1].lon, 2);
  EXPECT_EQ(a[2].timestamp, 9);
}
