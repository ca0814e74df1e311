#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace crashnet {

// A calendar day with ISO-8601 (YYYY-MM-DD) parsing and formatting.
// Crypto markets trade seven days a week, so no business-day calendar is
// applied anywhere in the library.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days d) : day_(d) {}
  Date(int year, unsigned month, unsigned day);

  // Throws DataError on malformed or impossible dates.
  static Date parse(std::string_view iso);
  static std::optional<Date> try_parse(std::string_view iso);

  std::string to_string() const;

  Date plus_days(int n) const { return Date(day_ + std::chrono::days(n)); }
  // Signed day count from *this to other.
  int days_until(Date other) const {
    return static_cast<int>((other.day_ - day_).count());
  }

  auto operator<=>(const Date&) const = default;

  std::chrono::sys_days raw() const { return day_; }

 private:
  std::chrono::sys_days day_{};
};

inline Date operator+(Date d, int days) { return d.plus_days(days); }
inline Date operator-(Date d, int days) { return d.plus_days(-days); }
inline int operator-(Date a, Date b) { return b.days_until(a); }

// Inclusive date interval.
struct DateWindow {
  Date start;
  Date end;

  bool contains(Date d) const { return start <= d && d <= end; }
  int length_days() const { return start.days_until(end) + 1; }
  bool operator==(const DateWindow&) const = default;
};

// Parses "YYYY-MM-DD:YYYY-MM-DD"; throws DataError if start > end.
DateWindow parse_window(std::string_view text);

}  // namespace crashnet
