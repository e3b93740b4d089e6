#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include <fmt/format.h>

namespace koalition {

/// Calendar date with day resolution (proleptic Gregorian, ISO 8601 text).
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
  constexpr Date(int y, unsigned m, unsigned d)
      : days_(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}}) {}

  /// Parses `YYYY-MM-DD`; rejects anything else, including impossible dates.
  static std::optional<Date> parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    if (!parse_field(text.substr(0, 4), y) || !parse_field(text.substr(5, 2), m) ||
        !parse_field(text.substr(8, 2), d)) {
      return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date{std::chrono::sys_days{ymd}};
  }

  std::string str() const {
    const std::chrono::year_month_day ymd{days_};
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  }

  constexpr std::chrono::sys_days days() const { return days_; }
  constexpr long serial() const { return days_.time_since_epoch().count(); }

  constexpr Date operator+(int n) const { return Date{days_ + std::chrono::days{n}}; }
  constexpr Date operator-(int n) const { return Date{days_ - std::chrono::days{n}}; }
  constexpr int operator-(Date other) const {
    return static_cast<int>((days_ - other.days_).count());
  }

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  template <typename T>
  static bool parse_field(std::string_view s, T& out) {
    for (char c : s) {
      if (c < '0' || c > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
  }

  std::chrono::sys_days days_{};
};

}  // namespace koalition
