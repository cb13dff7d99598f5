#pragma once

#include <cstdint>
#include <string>

#include "absl/time/time.h"

namespace tripcast {

enum class DayType { kWeekday, kWeekend };

const char* to_string(DayType t);
DayType parse_day_type(const std::string& s);

// Local calendar view of a UTC timestamp in one IANA zone.
struct LocalTime {
  std::int64_t day = 0;   // days since 1970-01-01 in local time
  int year = 0;
  int month = 0;
  int mday = 0;
  int hour = 0;
  int minute = 0;
  int second = 0;
  int weekday = 0;        // 0 = Monday ... 6 = Sunday

  int half_hour_bin() const { return hour * 2 + (minute >= 30 ? 1 : 0); }
  int seconds_of_day() const { return hour * 3600 + minute * 60 + second; }
};

class TimeZone {
 public:
  /// Loads an IANA zone from the system database; throws ConfigError if it
  /// cannot be found.
  explicit TimeZone(const std::string& name = "UTC");

  const std::string& name() const { return name_; }

  LocalTime local(std::int64_t unix_seconds) const;

  /// UNIX seconds of a local civil time (earliest instant when ambiguous).
  std::int64_t to_unix(int year, int month, int day, int hour = 0, int minute = 0,
                       int second = 0) const;

 private:
  std::string name_;
  absl::TimeZone zone_;
};

/// Saturday/Sunday in local time → weekend.
DayType classify_day_type(std::int64_t unix_seconds, const TimeZone& tz);

}  // namespace tripcast
