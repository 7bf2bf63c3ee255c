#pragma once

// Price-file parsing and pre-crash window selection.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace mfcrash {

using Date = std::chrono::year_month_day;

struct PricePoint {
  Date day;
  double close{0.0};
};

// Smallest window for which floor(sqrt(T)) >= 6 boxes and floor(sqrt(L)) >= 2 bins.
inline constexpr std::size_t kMinSignalLength = 36;

struct Signal {
  std::vector<PricePoint> points;
  std::string label;

  std::size_t size() const { return points.size(); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " at line " + std::to_string(line)), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class HeaderMode { Auto, Present, Absent };

struct ParseOptions {
  char delimiter{','};
  HeaderMode header{HeaderMode::Auto};
  std::string date_column{"date"};
  std::string close_column{"close"};
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

// Strict ISO-8601 calendar date, yyyy-mm-dd.
inline std::optional<Date> parse_date(std::string_view s) {
  s = detail::trim(s);
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (!detail::parse_int(s.substr(0, 4), y) || !detail::parse_int(s.substr(5, 2), m) ||
      !detail::parse_int(s.substr(8, 2), d)) {
    return std::nullopt;
  }
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

inline std::optional<double> parse_decimal(std::string_view s) {
  s = detail::trim(s);
  if (s.empty()) return std::nullopt;
  // strtod accepts things like "inf" and hex; restrict to plain decimals.
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E'))
      return std::nullopt;
  }
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) return std::nullopt;
  return v;
}

/// Reads delimiter-separated `date`/`close` rows. Without a header the first
/// two columns are taken as date and close; with one, columns are located by
/// name and any others are ignored. Blank lines are skipped. The whole file is
/// rejected on the first malformed row.
inline std::vector<PricePoint> parse_prices(std::istream& in, const ParseOptions& opts = {}) {
  std::vector<PricePoint> points;
  std::string raw;
  std::size_t line_no = 0;
  std::size_t date_col = 0;
  std::size_t close_col = 1;
  bool first_content_line = true;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    const auto fields = detail::split(line, opts.delimiter);

    if (first_content_line) {
      first_content_line = false;
      const bool header = opts.header == HeaderMode::Present ||
                          (opts.header == HeaderMode::Auto && !parse_date(fields.front()));
      if (header) {
        std::optional<std::size_t> dc;
        std::optional<std::size_t> cc;
        for (std::size_t i = 0; i < fields.size(); ++i) {
          if (fields[i] == opts.date_column) dc = i;
          if (fields[i] == opts.close_column) cc = i;
        }
        if (!dc || !cc) {
          throw ParseError("header lacks '" + opts.date_column + "' or '" + opts.close_column +
                               "' column",
                           line_no);
        }
        date_col = *dc;
        close_col = *cc;
        continue;
      }
    }

    if (fields.size() <= std::max(date_col, close_col))
      throw ParseError("missing column", line_no);
    const auto day = parse_date(fields[date_col]);
    if (!day) throw ParseError("malformed date", line_no);
    const auto close = parse_decimal(fields[close_col]);
    if (!close) throw ParseError("malformed price", line_no);
    if (!(*close > 0.0) || !std::isfinite(*close)) throw ParseError("non-positive price", line_no);
    if (!points.empty()) {
      if (points.back().day == *day) throw ParseError("duplicate date", line_no);
      if (points.back().day > *day) throw ParseError("date out of order", line_no);
    }
    points.push_back({*day, *close});
  }
  return points;
}

/// The last `n` records dated on or before `end_day`. Calendar gaps are not
/// filled: one record is one time unit.
inline Signal select_window(const std::vector<PricePoint>& points, const Date& end_day,
                            std::size_t n) {
  if (n < kMinSignalLength) {
    throw std::invalid_argument("select_window: window of " + std::to_string(n) +
                                " is below the minimum of " + std::to_string(kMinSignalLength));
  }
  std::size_t available = 0;
  while (available < points.size() && points[available].day <= end_day) ++available;
  if (available < n) {
    throw std::runtime_error("select_window: only " + std::to_string(available) +
                             " points available");
  }
  Signal s;
  s.points.assign(points.begin() + static_cast<std::ptrdiff_t>(available - n),
                  points.begin() + static_cast<std::ptrdiff_t>(available));
  s.label = std::to_string(n) + "@" + format_date(end_day);
  return s;
}

}  // namespace mfcrash
