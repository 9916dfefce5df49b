#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace zoo {

// Calendar date. The library runs on a monthly clock, so most arithmetic
// goes through month_index(); the day is kept for I/O and for the Unix-time
// conversion.
class Date {
 public:
  constexpr Date() = default;
  Date(int year, unsigned month, unsigned day);
  explicit Date(std::chrono::year_month_day ymd);

  // Parses yyyy-mm-dd. Throws DataError on malformed or invalid dates.
  static Date parse(std::string_view text);
  // Last calendar day of the month identified by month_index().
  static Date month_end(std::int64_t month_index);

  int year() const { return static_cast<int>(ymd_.year()); }
  unsigned month() const { return static_cast<unsigned>(ymd_.month()); }
  unsigned day() const { return static_cast<unsigned>(ymd_.day()); }

  // Months since year 0, January = 0.
  std::int64_t month_index() const { return std::int64_t{year()} * 12 + (month() - 1); }
  // Days since 1970-01-01.
  std::int64_t days_since_epoch() const;
  // Seconds since 1970-01-01T00:00:00Z at midnight of this date.
  std::int64_t unix_seconds() const { return days_since_epoch() * 86400; }
  // Calendar year plus elapsed fraction of the year.
  double fractional_year() const;

  Date add_months(int months) const;
  std::string iso() const;

  friend bool operator==(const Date& a, const Date& b) { return a.ymd_ == b.ymd_; }
  friend std::strong_ordering operator<=>(const Date& a, const Date& b) {
    return a.days_since_epoch() <=> b.days_since_epoch();
  }

 private:
  std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::January,
                                   std::chrono::day{1}};
};

// Inclusive range of dates.
struct DateRange {
  Date first;
  Date last;

  bool contains(const Date& d) const { return first <= d && d <= last; }
  // Number of calendar months touched by the range (both ends inclusive).
  std::int64_t months() const { return last.month_index() - first.month_index() + 1; }
};

}  // namespace zoo
