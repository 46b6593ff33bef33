#include "sectorrank/date.hpp"

#include <charconv>
#include <cstdio>

#include "sectorrank/error.hpp"

namespace sectorrank {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

bool parse_digits(std::string_view s, int &out) {
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace

bool is_valid_date(int year, int month, int day) {
  return year >= 1 && year <= 9999 && month >= 1 && month <= 12 && day >= 1 &&
         day <= days_in_month(year, month);
}

Date::Date(int year, int month, int day) : year_(year), month_(month), day_(day) {
  if (!is_valid_date(year, month, day)) {
    throw Error(ErrorKind::InvalidDate, "invalid calendar date " + std::to_string(year) +
                                            "-" + std::to_string(month) + "-" +
                                            std::to_string(day));
  }
}

Date Date::parse(std::string_view iso) {
  int y = 0, m = 0, d = 0;
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' ||
      !parse_digits(iso.substr(0, 4), y) || !parse_digits(iso.substr(5, 2), m) ||
      !parse_digits(iso.substr(8, 2), d) || !is_valid_date(y, m, d)) {
    throw Error(ErrorKind::InvalidDate, "expected YYYY-MM-DD, got '" + std::string(iso) + "'");
  }
  return Date(y, m, d);
}

// Howard Hinnant's days_from_civil.
std::int64_t Date::serial() const {
  const std::int64_t y = year_ - (month_ <= 2 ? 1 : 0);
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const std::int64_t yoe = y - era * 400;
  const std::int64_t mp = (month_ + 9) % 12;
  const std::int64_t doy = (153 * mp + 2) / 5 + day_ - 1;
  const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year_, month_, day_);
  return buf;
}

} // namespace sectorrank
