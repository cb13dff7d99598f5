#include <gtest/gtest.h>

#include <random>

#include "../oracles/oracles.h"
#include "../support/support.h"
#include "tripcast/error.h"
#include "tripcast/trips.h"

using namespace tripcast;
using testing_support::dlat_m;
using testing_support::dlon_m;
using testing_support::ping;

namespace {

const TimeZone kTz("America/Indiana/Indianapolis");

// Random walk alternating dwell episodes (jitter inside ~60 m) and moves,
// with irregular sampling.
std::vector<Ping> random_trace(std::mt19937_64& rng, std::size_t max_pings) {
  std::uniform_int_distribution<std::size_t> len(2, max_pings);
  std::uniform_real_distribution<double> jitter(-45, 45), step(80, 900), dir(0, 6.283185307);
  std::uniform_int_distribution<int> dt(30, 400), episode(1, 25);
  std::bernoulli_distribution dwell(0.5);
  const std::size_t n = len(rng);
  std::vector<Ping> out;
  double lon = -86.1, lat = 39.7;
  std::int64_t t = 1623067200;
  while (out.size() < n) {
    const bool stay = dwell(rng);
    const int k = episode(rng);
    for (int i = 0; i < k && out.size() < n; ++i) {
      if (stay) {
        out.push_back(ping("d", lon + dlon_m(jitter(rng), lat), lat + dlat_m(jitter(rng)), t));
      } else {
        const double a = dir(rng), s = step(rng);
        lon += dlon_m(s * std::cos(a), lat);
        lat += dlat_m(s * std::sin(a));
        out.push_back(ping("d", lon, lat, t));
      }
      t += dt(rng);
    }
  }
  return out;
}

}  // namespace

TEST(StayPoints, IdenticalPingsOverFifteenMinutes) {
  std::vector<Ping> pings;
  for (int i = 0; i < 5; ++i) pings.push_back(ping("d", -86.1, 39.7, 1000 + i * 225));
  const auto stays = detect_stay_points(pings);
  ASSERT_EQ(stays.size(), 1u);
  EXPECT_EQ(stays[0].duration(), 900);
  EXPECT_EQ(stays[0].ping_count, 5);
  EXPECT_NEAR(stays[0].centroid.lon, -86.1, 1e-12);
}

TEST(StayPoints, FastMovementHasNoStays) {
  std::vector<Ping> pings;
  for (int i = 0; i < 60; ++i) pings.push_back(ping("d", -86.1, 39.7 + dlat_m(1000.0 * i), i * 60));
  EXPECT_TRUE(detect_stay_points(pings).empty());
}

TEST(StayPoints, UnsortedInputRejected) {
  const std::vector<Ping> pings{ping("d", 0, 0, 10), ping("d", 0, 0, 5)};
  EXPECT_THROW(detect_stay_points(pings), DataError);
}

TEST(StayPoints, TwoDwellEpisodesMatchOracle) {
  std::vector<Ping> pings;
  std::int64_t t = 0;
  for (int i = 0; i < 6; ++i, t += 300) pings.push_back(ping("d", -86.1, 39.7 + dlat_m(5.0 * i), t));
  for (int i = 1; i <= 5; ++i, t += 60) pings.push_back(ping("d", -86.1, 39.7 + dlat_m(400.0 * i), t));
  for (int i = 0; i < 6; ++i, t += 300) pings.push_back(ping("d", -86.1, 39.7 + dlat_m(2400.0 + 3 * i), t));
  const auto stays = detect_stay_points(pings);
  std::vector<oracle::TracePoint> pts;
  for (const auto& p : pings) pts.push_back({p.lon, p.lat, p.timestamp});
  const auto expect = oracle::stay_runs(pts, 100, 600);
  ASSERT_EQ(stays.size(), 2u);
  ASSERT_EQ(expect.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(stays[k].arrival, pings[expect[k].first].timestamp);
    EXPECT_EQ(stays[k].departure, pings[expect[k].last].timestamp);
  }
}

TEST(StayPoints, RandomTracesMatchBruteForce) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const auto pings = random_trace(rng, 300);
    std::vector<oracle::TracePoint> pts;
    for (const auto& p : pings) pts.push_back({p.lon, p.lat, p.timestamp});
    const auto expect = oracle::stay_runs(pts, 100, 600);
    const auto got = detect_stay_points(pings);
    ASSERT_EQ(got.size(), expect.size()) << "trial " << trial;
    for (std::size_t k = 0; k < got.size(); ++k) {
      EXPECT_EQ(got[k].arrival, pings[expect[k].first].timestamp);
      EXPECT_EQ(got[k].departure, pings[expect[k].last].timestamp);
      EXPECT_EQ(got[k].ping_count, static_cast<int>(expect[k].last - expect[k].first + 1));
    }
  }
}

TEST(SplitOnGaps, SplitsAboveThreshold) {
  const std::vector<Ping> pings{ping("d", 0, 0, 0), ping("d", 0, 0, 100), ping("d", 0, 0, 100 + 21601),
                                ping("d", 0, 0, 100 + 21601 + 21600)};
  const auto parts = split_on_gaps(pings, 21600);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].size(), 2u);
  EXPECT_EQ(parts[1].size(), 2u);
}

namespace {

std::vector<Ping> three_stop_day() {
  std::vector<Ping> pings;
  const std::int64_t t0 = kTz.to_unix(2021, 6, 7, 8);  // Monday
  auto dwell = [&](double north_m, std::int64_t start) {
    for (int i = 0; i < 4; ++i) pings.push_back(ping("d", -86.1, 39.7 + dlat_m(north_m), start + i * 300));
  };
  dwell(0, t0);
  pings.push_back(ping("d", -86.1, 39.7 + dlat_m(1000), t0 + 1200));
  dwell(2000, t0 + 1500);
  pings.push_back(ping("d", -86.1, 39.7 + dlat_m(1000), t0 + 3000));
  dwell(0, t0 + 3300);
  return pings;
}

}  // namespace

TEST(SegmentTrips, ConsecutiveStayPairs) {
  const auto pings = three_stop_day();
  const auto stays = detect_stay_points(pings);
  ASSERT_EQ(stays.size(), 3u);
  const auto trips = segment_trips(pings, stays, kTz);
  ASSERT_EQ(trips.size(), 2u);
  EXPECT_LT(trips[0].depart, trips[1].depart);
  EXPECT_EQ(trips[0].travel_time, static_cast<double>(stays[1].arrival - stays[0].departure));
  // Path: centroid -> 1000 m ping -> centroid, about 2 km.
  EXPECT_NEAR(trips[0].path_length, 2000, 1.0);
  EXPECT_EQ(trips[0].day_type, DayType::kWeekday);
  EXPECT_TRUE(validate(trips[0]).ok());

  const std::vector<StayPoint> one{stays[0]};
  EXPECT_TRUE(segment_trips(pings, one, kTz).empty());
}

TEST(DayType, CalendarAndBoundary) {
  EXPECT_EQ(classify_day_type(kTz.to_unix(2021, 6, 7, 8), kTz), DayType::kWeekday);
  EXPECT_EQ(classify_day_type(kTz.to_unix(2021, 6, 5, 8), kTz), DayType::kWeekend);
  EXPECT_EQ(classify_day_type(kTz.to_unix(2021, 6, 4, 23, 59), kTz), DayType::kWeekday);
}

TEST(Trips, CsvRoundTrip) {
  const auto pings = three_stop_day();
  const auto dt = extract_device_trips(pings, {}, kTz);
  ASSERT_EQ(dt.trips.size(), 2u);
  std::stringstream s;
  write_trips(s, dt.trips);
  const auto back = read_trips(s);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].depart, dt.trips[i].depart);
    EXPECT_EQ(back[i].origin(), dt.trips[i].origin());
    EXPECT_EQ(back[i].path_length, dt.trips[i].path_length);
    EXPECT_EQ(back[i].day_type, dt.trips[i].day_type);
  }
}
