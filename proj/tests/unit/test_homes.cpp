#include <gtest/gtest.h>

#include "../oracles/oracles.h"
#include "../support/support.h"
#include "tripcast/error.h"
#include "tripcast/homes.h"

using namespace tripcast;
using testing_support::dlat_m;
using testing_support::dlon_m;
using testing_support::ping;

namespace {

const TimeZone kTz("America/Indiana/Indianapolis");

std::int64_t at(int mday, int hour, int minute = 0) {
  return kTz.to_unix(2021, 6, mday, hour, minute);
}

}  // namespace

TEST(NightWindow, HalfOpenBounds) {
  const NightWindow w;
  EXPECT_TRUE(w.contains(kTz.local(at(7, 22, 15))));
  EXPECT_FALSE(w.contains(kTz.local(at(7, 12))));
  EXPECT_FALSE(w.contains(kTz.local(at(7, 6))));
  EXPECT_TRUE(w.contains(kTz.local(at(7, 5, 59))));
  EXPECT_TRUE(w.contains(kTz.local(at(7, 21))));
  // 23:00 on the 7th and 02:00 on the 8th belong to one night.
  EXPECT_EQ(w.night_of(kTz.local(at(7, 23))), w.night_of(kTz.local(at(8, 2))));
  EXPECT_NE(w.night_of(kTz.local(at(7, 23))), w.night_of(kTz.local(at(8, 23))));
}

TEST(MeanShift, SinglePoint) {
  const std::vector<LonLat> pts{{-86.1, 39.7}};
  const auto modes = mean_shift(pts);
  ASSERT_EQ(modes.size(), 1u);
  EXPECT_NEAR(modes[0].center.lon, -86.1, 1e-12);
  EXPECT_EQ(modes[0].count, 1u);
}

TEST(MeanShift, IdenticalPoints) {
  const std::vector<LonLat> pts(17, LonLat{10, 50});
  const auto modes = mean_shift(pts);
  ASSERT_EQ(modes.size(), 1u);
  EXPECT_EQ(modes[0].count, 17u);
  EXPECT_NEAR(modes[0].center.lat, 50, 1e-12);
}

TEST(MeanShift, TwoClustersMatchDensityMaxima) {
  const double lat0 = 39.7, lon0 = -86.1;
  std::vector<LonLat> pts;
  // Cluster A (5 points within ~20 m), cluster B (3 points) 1 km east.
  const double ax[] = {0, 10, -10, 5, -5}, ay[] = {0, 5, -5, -10, 10};
  for (int i = 0; i < 5; ++i) pts.push_back({lon0 + dlon_m(ax[i], lat0), lat0 + dlat_m(ay[i])});
  const double bx[] = {1000, 1012, 994}, by[] = {0, 8, -6};
  for (int i = 0; i < 3; ++i) pts.push_back({lon0 + dlon_m(bx[i], lat0), lat0 + dlat_m(by[i])});

  const auto modes = mean_shift(pts, {100.0, 0.01, 200});
  ASSERT_EQ(modes.size(), 2u);
  EXPECT_EQ(modes[0].count, 5u);
  EXPECT_EQ(modes[1].count, 3u);

  // Brute force: the kernel density on a fine grid is maximal (all cluster
  // members inside the window) at the recovered mode, which is the cluster
  // centroid.
  auto density = [&](double lon, double lat) {
    int c = 0;
    for (const auto& p : pts) c += oracle::haversine(lon, lat, p.lon, p.lat) <= 100.0;
    return c;
  };
  for (int m = 0; m < 2; ++m) {
    const auto first = pts.begin() + (m == 0 ? 0 : 5);
    const std::vector<LonLat> members(first, first + (m == 0 ? 5 : 3));
    const auto centroid = mean_point(members);
    EXPECT_LT(oracle::haversine(modes[m].center.lon, modes[m].center.lat, centroid.lon, centroid.lat),
              0.5);
    int best = 0;
    for (int gx = -150; gx <= 150; gx += 5)
      for (int gy = -150; gy <= 150; gy += 5)
        best = std::max(best, density(centroid.lon + dlon_m(gx, lat0), centroid.lat + dlat_m(gy)));
    EXPECT_EQ(density(modes[m].center.lon, modes[m].center.lat), best);
  }
}

TEST(DetectHome, AllNightPingsAtOnePoint) {
  std::vector<Ping> pings;
  for (int d = 7; d < 10; ++d) pings.push_back(ping("d", -86.2, 39.8, at(d, 23)));
  const auto h = detect_home(pings, kTz);
  ASSERT_TRUE(h);
  EXPECT_NEAR(h->home.lon, -86.2, 1e-12);
  EXPECT_NEAR(h->home.lat, 39.8, 1e-12);
  EXPECT_EQ(h->nights, 3);
}

TEST(DetectHome, NightSupportBeatsPingCount) {
  std::vector<Ping> pings;
  // A: 20 pings over 5 nights.
  for (int d = 7; d < 12; ++d)
    for (int k = 0; k < 4; ++k) pings.push_back(ping("d", -86.2, 39.8, at(d, 22, k * 10)));
  // B: 4 pings in a single night, about 1.7 km east.
  for (int k = 0; k < 4; ++k) pings.push_back(ping("d", -86.18, 39.8, at(14, 1, k * 5)));
  std::sort(pings.begin(), pings.end(),
            [](const Ping& a, const Ping& b) { return a.timestamp < b.timestamp; });
  const auto h = detect_home(pings, kTz);
  ASSERT_TRUE(h);
  EXPECT_NEAR(h->home.lon, -86.2, 1e-9);
  EXPECT_EQ(h->nights, 5);
}

TEST(DetectHome, DaytimeOnlyDeviceHasNoHome) {
  std::vector<Ping> pings;
  for (int d = 7; d < 12; ++d) pings.push_back(ping("d", -86.2, 39.8, at(d, 12)));
  EXPECT_FALSE(detect_home(pings, kTz));
}

TEST(Representativeness, RatiosAndWeights) {
  std::vector<HomeEstimate> homes;
  for (int i = 0; i < 200; ++i) {
    HomeEstimate h;
    h.device_id = "d" + std::to_string(1000 + i);
    h.county_id = "C1";
    homes.push_back(h);
  }
  const std::map<std::string, std::int64_t> pop{{"C1", 1000}, {"C2", 1000}, {"C3", 0}};
  const auto table = compute_representativeness(homes, pop);
  EXPECT_DOUBLE_EQ(*table.regions.at("C1").ratio, 0.2);
  EXPECT_DOUBLE_EQ(*table.regions.at("C2").ratio, 0.0);
  EXPECT_FALSE(table.regions.at("C3").ratio);
  EXPECT_TRUE(validate(table).ok());

  std::map<std::string, HomeEstimate> by_id;
  for (const auto& h : homes) by_id[h.device_id] = h;
  EXPECT_DOUBLE_EQ(*user_weight("d1000", by_id, table), 5.0);
  EXPECT_FALSE(user_weight("nobody", by_id, table));

  std::vector<std::string> devices{"d1000", "nobody"};
  const auto w = compute_user_weights(devices, homes, table);
  EXPECT_EQ(w.weights.size(), 1u);
  EXPECT_EQ(w.missing_home, 1);
}

TEST(Representativeness, FullCoverageWeightOne) {
  HomeEstimate h;
  h.device_id = "a";
  h.county_id = "C";
  const std::vector<HomeEstimate> homes{h};
  const auto t = compute_representativeness(homes, {{"C", 1}});
  std::map<std::string, HomeEstimate> by_id{{"a", h}};
  EXPECT_DOUBLE_EQ(*user_weight("a", by_id, t), 1.0);
}

TEST(Representativeness, HomeInUnknownRegionIsDataError) {
  HomeEstimate h;
  h.device_id = "a";
  h.county_id = "nowhere";
  const std::vector<HomeEstimate> homes{h};
  EXPECT_THROW(compute_representativeness(homes, {{"C", 10}}), DataError);
}

TEST(Homes, CsvRoundTrip) {
  HomeEstimate h;
  h.device_id = "a";
  h.home = {-86.123456789, 39.987654321};
  h.zone_id = "Z1";
  h.county_id = "C1";
  h.nights = 4;
  HomeEstimate g;
  g.device_id = "b";
  g.home = {1, 2};
  const std::vector<HomeEstimate> homes{h, g};
  std::stringstream s;
  write_homes(s, homes);
  const auto back = read_homes(s);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].home, h.home);
  EXPECT_EQ(back[0].zone_id, "Z1");
  EXPECT_EQ(back[0].nights, 4);
  EXPECT_FALSE(back[1].zone_id);
}
