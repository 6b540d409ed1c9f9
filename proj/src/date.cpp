#include "episignal/date.hpp"

#include <charconv>
#include <cstdio>

#include "episignal/error.hpp"

namespace episignal {

namespace {

int parse_fixed(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::ParseError, "invalid date '" + std::string(whole) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw Error(ErrorKind::ParseError, "invalid date '" + std::string(text) + "'");
  }
  const int y = parse_fixed(text.substr(0, 4), text);
  const int m = parse_fixed(text.substr(5, 2), text);
  const int d = parse_fixed(text.substr(8, 2), text);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw Error(ErrorKind::ParseError, "invalid date '" + std::string(text) + "'");
  }
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Period make_period(Date start, Date end) {
  if (end < start) {
    throw Error(ErrorKind::InvalidArgument,
                "period end " + format_date(end) + " precedes start " + format_date(start));
  }
  return {start, end};
}

Period parse_period(std::string_view text) {
  text = trim(text);
  const auto sep = text.find("..");
  if (sep == std::string_view::npos) {
    throw Error(ErrorKind::ParseError, "period '" + std::string(text) + "' is not START..END");
  }
  return make_period(parse_date(text.substr(0, sep)), parse_date(text.substr(sep + 2)));
}

std::vector<Period> parse_periods(std::string_view text) {
  std::vector<Period> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (!item.empty()) out.push_back(parse_period(item));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string format_period(const Period& p) { return format_date(p.start) + ".." + format_date(p.end); }

}  // namespace episignal
