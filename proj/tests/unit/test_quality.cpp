#include <gtest/gtest.h>

#include <random>
#include <set>

#include "../support/support.h"
#include "tripcast/quality.h"
#include "tripcast/timezone.h"

using namespace tripcast;
using testing_support::ping;

namespace {

const TimeZone kUtc("UTC");
// 2021-03-01 00:00:00 UTC
constexpr std::int64_t kDay0 = 1614556800;

// One ping in each of `bins` distinct half-hour bins on each listed day.
void add_user(std::vector<Ping>& out, const std::string& id, int bins, std::vector<int> days) {
  for (int d : days)
    for (int b = 0; b < bins; ++b) out.push_back(ping(id, 0, 0, kDay0 + d * 86400 + b * 1800 + 60));
}

}  // namespace

TEST(FilterAccuracy, BoundaryInclusive) {
  const std::vector<Ping> in{ping("a", 0, 0, 1, 10), ping("a", 0, 0, 2, 50),
                             ping("a", 0, 0, 3, 50.1)};
  const auto out = filter_accuracy(in, 50);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[1].accuracy, 50);
  EXPECT_TRUE(filter_accuracy({}, 50).empty());
}

TEST(QualityMatrix, CountingRules) {
  std::vector<Ping> pings;
  add_user(pings, "twelve", 12, {0});
  add_user(pings, "nine", 9, {0, 1, 2, 3, 4});
  add_user(pings, "ten3", 10, {0, 1, 2});
  const auto m = build_quality_matrix(pings, 2021, kUtc);
  EXPECT_EQ(m.total_users, 3);
  // (10,1): twelve + ten3
  EXPECT_EQ(m.at(10, 1).users, 2);
  EXPECT_EQ(m.at(13, 1).users, 0);
  EXPECT_EQ(m.at(10, 3).users, 1);
  EXPECT_EQ(m.at(9, 5).users, 1);

  const auto f = filter_users(pings, 10, 1, kUtc);
  EXPECT_EQ(f.retained_devices, (std::vector<std::string>{"ten3", "twelve"}));
  EXPECT_EQ(f.retained_pings.size(), 12u + 30u);
}

TEST(QualityMatrix, OutOfYearPingsSkipped) {
  std::vector<Ping> pings;
  add_user(pings, "a", 3, {0});
  pings.push_back(ping("a", 0, 0, 1577836800 - 10));  // 2019
  const auto m = build_quality_matrix(pings, 2021, kUtc);
  EXPECT_EQ(m.out_of_year_pings, 1);
  EXPECT_EQ(m.total_pings, 3);
}

TEST(QualityMatrix, UsesLocalDays) {
  // 23:45 and 00:15 UTC straddle midnight in UTC but not in Chicago (UTC-6).
  const TimeZone chicago("America/Chicago");
  std::vector<Ping> pings{ping("a", 0, 0, kDay0 + 86400 - 900), ping("a", 0, 0, kDay0 + 86400 + 900)};
  const auto utc = build_quality_matrix(pings, 2021, kUtc, 3);
  const auto loc = build_quality_matrix(pings, 2021, chicago, 3);
  EXPECT_EQ(utc.at(1, 2).users, 1);
  EXPECT_EQ(loc.at(1, 2).users, 0);
  EXPECT_EQ(loc.at(2, 1).users, 1);
}

TEST(QualityMatrix, MergeEqualsWhole) {
  std::vector<Ping> a, b;
  add_user(a, "u1", 5, {0, 1});
  add_user(b, "u2", 11, {3});
  std::vector<Ping> all = a;
  all.insert(all.end(), b.begin(), b.end());
  auto part = build_quality_matrix(a, 2021, kUtc);
  merge_into(part, build_quality_matrix(b, 2021, kUtc));
  const auto whole = build_quality_matrix(all, 2021, kUtc);
  for (std::size_t i = 0; i < whole.cells.size(); ++i) {
    EXPECT_EQ(part.cells[i].users, whole.cells[i].users);
    EXPECT_EQ(part.cells[i].pings, whole.cells[i].pings);
    EXPECT_DOUBLE_EQ(part.cells[i].user_share, whole.cells[i].user_share);
  }
}

TEST(QualityMatrix, MonotoneAndConsistentWithFilter) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Ping> pings;
    std::uniform_int_distribution<int> nusers(1, 20), bins(1, 48), ndays(1, 12);
    const int users = nusers(rng);
    for (int u = 0; u < users; ++u) {
      std::set<int> days;
      const int k = ndays(rng);
      while (static_cast<int>(days.size()) < k) days.insert(std::uniform_int_distribution<int>(0, 20)(rng));
      add_user(pings, "u" + std::to_string(u), bins(rng), {days.begin(), days.end()});
    }
    const auto m = build_quality_matrix(pings, 2021, kUtc);
    for (int b = 1; b <= kBinsPerDay; ++b)
      for (int d = 1; d <= m.max_days; ++d) {
        if (b > 1) EXPECT_LE(m.at(b, d).users, m.at(b - 1, d).users);
        if (d > 1) EXPECT_LE(m.at(b, d).users, m.at(b, d - 1).users);
      }
    for (int b : {1, 10, 25, 48})
      for (int d : {1, 3, 7}) {
        const auto f = filter_users(pings, b, d, kUtc);
        EXPECT_EQ(static_cast<std::int64_t>(f.retained_devices.size()), m.at(b, d).users);
        EXPECT_EQ(static_cast<std::int64_t>(f.retained_pings.size()), m.at(b, d).pings);
      }
  }
}
