#include "tripcast/quality.h"

#include <algorithm>
#include <array>
#include <bitset>
#include <map>
#include <ostream>
#include <unordered_map>

#include "tripcast/csv.h"

namespace tripcast {
namespace {

struct DeviceProfile {
  std::map<std::int64_t, std::bitset<kBinsPerDay>> days;  // local day → bins hit
  std::int64_t pings = 0;

  // qualifying[b - 1] = number of days with at least b bins.
  std::array<int, kBinsPerDay> days_with_at_least() const {
    std::array<int, kBinsPerDay + 1> by_count{};
    for (const auto& [day, bins] : days) ++by_count[bins.count()];
    std::array<int, kBinsPerDay> out{};
    int running = 0;
    for (int b = kBinsPerDay; b >= 1; --b) {
      running += by_count[static_cast<std::size_t>(b)];
      out[static_cast<std::size_t>(b - 1)] = running;
    }
    return out;
  }
};

double share(std::int64_t part, std::int64_t whole) {
  return whole > 0 ? static_cast<double>(part) / static_cast<double>(whole) : 0.0;
}

void refresh_shares(QualityMatrix& m) {
  for (auto& c : m.cells) {
    c.user_share = share(c.users, m.total_users);
    c.ping_share = share(c.pings, m.total_pings);
  }
}

}  // namespace

std::vector<Ping> filter_accuracy(std::span<const Ping> pings, double max_error_m) {
  std::vector<Ping> out;
  out.reserve(pings.size());
  for (const auto& p : pings)
    if (p.accuracy <= max_error_m) out.push_back(p);
  return out;
}

QualityMatrix build_quality_matrix(std::span<const Ping> pings, int year, const TimeZone& tz,
                                   int max_days) {
  QualityMatrix m;
  m.year = year;
  m.max_days = max_days;
  m.cells.assign(static_cast<std::size_t>(kBinsPerDay * max_days), {});

  std::unordered_map<std::string, DeviceProfile> devices;
  for (const auto& p : pings) {
    const LocalTime lt = tz.local(p.timestamp);
    if (lt.year != year) {
      ++m.out_of_year_pings;
      continue;
    }
    auto& dev = devices[p.device_id];
    dev.days[lt.day].set(static_cast<std::size_t>(lt.half_hour_bin()));
    ++dev.pings;
  }
  m.total_users = static_cast<std::int64_t>(devices.size());
  for (const auto& [id, dev] : devices) {
    m.total_pings += dev.pings;
    const auto counts = dev.days_with_at_least();
    for (int b = 1; b <= kBinsPerDay; ++b) {
      const int q = std::min(counts[static_cast<std::size_t>(b - 1)], max_days);
      for (int d = 1; d <= q; ++d) {
        auto& cell = m.at(b, d);
        ++cell.users;
        cell.pings += dev.pings;
      }
    }
  }
  refresh_shares(m);
  return m;
}

void merge_into(QualityMatrix& into, const QualityMatrix& other) {
  into.total_users += other.total_users;
  into.total_pings += other.total_pings;
  into.out_of_year_pings += other.out_of_year_pings;
  for (std::size_t i = 0; i < into.cells.size(); ++i) {
    into.cells[i].users += other.cells[i].users;
    into.cells[i].pings += other.cells[i].pings;
  }
  refresh_shares(into);
}

void write_quality_matrix(std::ostream& out, const QualityMatrix& m) {
  csv::Writer w(out);
  w.row({"b", "d", "users", "pings", "user_share", "ping_share"});
  for (int b = 1; b <= kBinsPerDay; ++b) {
    for (int d = 1; d <= m.max_days; ++d) {
      const auto& c = m.at(b, d);
      w.field(b).field(d).field(c.users).field(c.pings).field(c.user_share).field(
          c.ping_share);
      w.end_row();
    }
  }
}

UserFilterResult filter_users(std::span<const Ping> pings, int min_bins, int min_days,
                              const TimeZone& tz) {
  std::unordered_map<std::string, std::map<std::int64_t, std::bitset<kBinsPerDay>>> days;
  for (const auto& p : pings) {
    const LocalTime lt = tz.local(p.timestamp);
    days[p.device_id][lt.day].set(static_cast<std::size_t>(lt.half_hour_bin()));
  }
  UserFilterResult r;
  r.total_users = static_cast<std::int64_t>(days.size());
  r.total_pings = static_cast<std::int64_t>(pings.size());
  std::unordered_map<std::string, bool> keep;
  for (const auto& [id, per_day] : days) {
    int good_days = 0;
    for (const auto& [day, bins] : per_day)
      if (static_cast<int>(bins.count()) >= min_bins) ++good_days;
    const bool ok = good_days >= min_days;
    keep[id] = ok;
    if (ok) r.retained_devices.push_back(id);
  }
  std::sort(r.retained_devices.begin(), r.retained_devices.end());
  for (const auto& p : pings)
    if (keep[p.device_id]) r.retained_pings.push_back(p);
  r.user_share = share(static_cast<std::int64_t>(r.retained_devices.size()), r.total_users);
  r.ping_share = share(static_cast<std::int64_t>(r.retained_pings.size()), r.total_pings);
  return r;
}

}  // namespace tripcast
