#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace insar {

/// Calendar date (UTC day resolution) parsed from and printed as ISO-8601
/// `YYYY-MM-DD`.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}

  static Date parse(std::string_view iso);

  std::string to_string() const;
  std::chrono::sys_days days() const { return days_; }

  /// Signed day count `other - *this`.
  int days_until(const Date& other) const {
    return static_cast<int>((other.days_ - days_).count());
  }
  Date plus_days(int n) const { return Date(days_ + std::chrono::days(n)); }

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

inline constexpr double kDaysPerYear = 365.25;

}  // namespace insar
