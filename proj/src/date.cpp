#include "crashnet/date.hpp"

#include <charconv>
#include <cstdio>

#include "crashnet/errors.hpp"

namespace crashnet {

namespace {

bool parse_int(std::string_view s, int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year{year},
                                  std::chrono::month{month},
                                  std::chrono::day{day}};
  if (!ymd.ok()) {
    throw DataError("invalid calendar date: " + std::to_string(year) + "-" +
                    std::to_string(month) + "-" + std::to_string(day));
  }
  day_ = std::chrono::sys_days{ymd};
}

std::optional<Date> Date::try_parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(iso.substr(0, 4), y) || !parse_int(iso.substr(5, 2), m) ||
      !parse_int(iso.substr(8, 2), d)) {
    return std::nullopt;
  }
  std::chrono::year_month_day ymd{std::chrono::year{y},
                                  std::chrono::month{unsigned(m)},
                                  std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date(std::chrono::sys_days{ymd});
}

Date Date::parse(std::string_view iso) {
  auto d = try_parse(iso);
  if (!d) throw DataError("unparsable date '" + std::string(iso) + "' (expected YYYY-MM-DD)");
  return *d;
}

std::string Date::to_string() const {
  std::chrono::year_month_day ymd{day_};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

DateWindow parse_window(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw DataError("window '" + std::string(text) +
                    "' must be START:END with ISO dates");
  }
  DateWindow w{Date::parse(text.substr(0, colon)),
               Date::parse(text.substr(colon + 1))};
  if (w.start > w.end) {
    throw DataError("window start " + w.start.to_string() + " is after end " +
                    w.end.to_string());
  }
  return w;
}

}  // namespace crashnet
