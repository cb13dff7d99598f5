#include "tripcast/timezone.h"

#include "absl/time/civil_time.h"
#include "tripcast/error.h"

namespace tripcast {

const char* to_string(DayType t) {
  return t == DayType::kWeekday ? "weekday" : "weekend";
}

DayType parse_day_type(const std::string& s) {
  if (s == "weekday") return DayType::kWeekday;
  if (s == "weekend") return DayType::kWeekend;
  throw DataError("unknown day type '" + s + "'");
}

TimeZone::TimeZone(const std::string& name) : name_(name) {
  if (!absl::LoadTimeZone(name, &zone_)) {
    throw ConfigError("unknown time zone '" + name + "'");
  }
}

LocalTime TimeZone::local(std::int64_t unix_seconds) const {
  const absl::CivilSecond cs = zone_.At(absl::FromUnixSeconds(unix_seconds)).cs;
  LocalTime lt;
  lt.year = static_cast<int>(cs.year());
  lt.month = cs.month();
  lt.mday = cs.day();
  lt.hour = cs.hour();
  lt.minute = cs.minute();
  lt.second = cs.second();
  lt.day = absl::CivilDay(cs) - absl::CivilDay(1970, 1, 1);
  lt.weekday = static_cast<int>(absl::GetWeekday(absl::CivilDay(cs)));
  return lt;
}

std::int64_t TimeZone::to_unix(int year, int month, int day, int hour, int minute,
                               int second) const {
  const absl::CivilSecond cs(year, month, day, hour, minute, second);
  return absl::ToUnixSeconds(zone_.At(cs).pre);
}

DayType classify_day_type(std::int64_t unix_seconds, const TimeZone& tz) {
  // absl::Weekday: monday = 0 ... saturday = 5, sunday = 6.
  return tz.local(unix_seconds).weekday >= 5 ? DayType::kWeekend : DayType::kWeekday;
}

}  // namespace tripcast
