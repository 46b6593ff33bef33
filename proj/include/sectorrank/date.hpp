#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace sectorrank {

/// Proleptic Gregorian calendar date. Always valid once constructed.
class Date {
public:
  Date() = default;
  Date(int year, int month, int day);

  /// Parses strict ISO `YYYY-MM-DD`. Throws Error(InvalidDate).
  static Date parse(std::string_view iso);

  int year() const { return year_; }
  int month() const { return month_; }
  int day() const { return day_; }

  /// Days since 1970-01-01.
  std::int64_t serial() const;
  std::string iso() const;

  auto operator<=>(const Date &) const = default;

private:
  int year_ = 1970;
  int month_ = 1;
  int day_ = 1;
};

bool is_valid_date(int year, int month, int day);

} // namespace sectorrank
