#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace episignal {

using Date = std::chrono::sys_days;

/// Parses an ISO-8601 calendar date (yyyy-mm-dd). Throws ParseError.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Inclusive calendar range.
struct Period {
  Date start;
  Date end;

  bool contains(Date d) const { return start <= d && d <= end; }
  friend bool operator==(const Period&, const Period&) = default;
};

Period make_period(Date start, Date end);

/// `YYYY-MM-DD..YYYY-MM-DD`
Period parse_period(std::string_view text);
/// Comma-separated list of periods.
std::vector<Period> parse_periods(std::string_view text);
std::string format_period(const Period& p);

}  // namespace episignal
