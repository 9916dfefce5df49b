#include "zoo/date.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "zoo/errors.hpp"

namespace zoo {

namespace chr = std::chrono;

Date::Date(int year, unsigned month, unsigned day)
    : ymd_{chr::year{year}, chr::month{month}, chr::day{day}} {
  if (!ymd_.ok()) {
    throw DataError("invalid calendar date " + std::to_string(year) + "-" +
                    std::to_string(month) + "-" + std::to_string(day));
  }
}

Date::Date(chr::year_month_day ymd) : ymd_{ymd} {
  if (!ymd_.ok()) throw DataError("invalid calendar date");
}

Date Date::parse(std::string_view text) {
  auto fail = [&]() -> Date {
    throw DataError("malformed date '" + std::string(text) + "' (expected yyyy-mm-dd)");
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return fail();
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto parse_field = [&](std::size_t pos, std::size_t len, auto& out) {
    const char* b = text.data() + pos;
    auto [ptr, ec] = std::from_chars(b, b + len, out);
    return ec == std::errc{} && ptr == b + len;
  };
  if (!parse_field(0, 4, y) || !parse_field(5, 2, m) || !parse_field(8, 2, d)) return fail();
  chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
  if (!ymd.ok()) return fail();
  return Date{ymd};
}

Date Date::month_end(std::int64_t month_index) {
  auto y = static_cast<int>(month_index >= 0 ? month_index / 12 : (month_index - 11) / 12);
  auto m = static_cast<unsigned>(month_index - std::int64_t{y} * 12 + 1);
  chr::year_month_day_last last{chr::year{y}, chr::month_day_last{chr::month{m}}};
  return Date{chr::year_month_day{last}};
}

std::int64_t Date::days_since_epoch() const {
  return chr::sys_days{ymd_}.time_since_epoch().count();
}

double Date::fractional_year() const {
  const auto start = Date(year(), 1, 1).days_since_epoch();
  const auto end = Date(year() + 1, 1, 1).days_since_epoch();
  return year() + static_cast<double>(days_since_epoch() - start) / static_cast<double>(end - start);
}

Date Date::add_months(int months) const {
  const auto target = Date::month_end(month_index() + months);
  const unsigned d = std::min(day(), target.day());
  return Date(target.year(), target.month(), d);
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
  return buf;
}

}  // namespace zoo
