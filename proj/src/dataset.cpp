#include "episignal/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <ostream>
#include <set>
#include <tuple>

#include <json.hpp>

#include "episignal/csv.hpp"
#include "episignal/error.hpp"

namespace episignal {

namespace {

// Base letters for U+0100..U+017F. '1' stands for "ij", '2' for "oe".
constexpr std::string_view kLatinExtendedA =
    "aaaaaa"        // 0100
    "cccccccc"      // 0106
    "dddd"          // 010E
    "eeeeeeeeee"    // 0112
    "gggggggg"      // 011C
    "hhhh"          // 0124
    "iiiiiiiiii"    // 0128
    "11"            // 0132
    "jj"            // 0134
    "kkk"           // 0136
    "llllllllll"    // 0139
    "nnnnnnnnn"     // 0143
    "oooooo"        // 014C
    "22"            // 0152
    "rrrrrr"        // 0154
    "ssssssss"      // 015A
    "tttttt"        // 0162
    "uuuuuuuuuuuu"  // 0168
    "ww"            // 0174
    "yyy"           // 0176
    "zzzzzz"        // 0179
    "s";            // 017F
static_assert(kLatinExtendedA.size() == 0x80);

// U+00C0..U+00FF, lowercased. '*' marks symbols (multiplication/division signs).
constexpr std::string_view kLatin1 =
    "aaaaaa1ceeeeiiii"  // C0
    "dnooooo*ouuuuy3s"  // D0
    "aaaaaa1ceeeeiiii"  // E0
    "dnooooo*ouuuuy3y";  // F0
static_assert(kLatin1.size() == 0x40);

void append_base(std::string& out, char c) {
  switch (c) {
    case '1': out += "ae"; break;
    case '3': out += "th"; break;
    case '*': out.push_back(' '); break;
    default: out.push_back(c);
  }
}

void append_codepoint(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    const char c = static_cast<char>(cp);
    if (c >= 'A' && c <= 'Z') {
      out.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-') {
      out.push_back(c);
    } else if (c == '\'' || c == '`') {
      // apostrophes join: "d'oeste" -> "doeste"
    } else {
      out.push_back(' ');
    }
    return;
  }
  if (cp >= 0x300 && cp <= 0x36F) return;  // combining marks
  if (cp == 0xA0) {
    out.push_back(' ');
    return;
  }
  if (cp == 0xDF) {
    out += "ss";
    return;
  }
  if (cp >= 0xC0 && cp <= 0xFF) {
    append_base(out, kLatin1[cp - 0xC0]);
    return;
  }
  if (cp >= 0x100 && cp <= 0x17F) {
    const char c = kLatinExtendedA[cp - 0x100];
    if (c == '1') out += "ij";
    else if (c == '2') out += "oe";
    else out.push_back(c);
    return;
  }
  if (cp == 0x2018 || cp == 0x2019) return;
  if (cp == 0x2010 || cp == 0x2011 || cp == 0x2013 || cp == 0x2014) {
    out.push_back('-');
    return;
  }
  if (cp == 0x2002 || cp == 0x2003 || cp == 0x2009 || cp == 0x3000) out.push_back(' ');
}

std::string collapse_spaces(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (c == ' ') {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

double parse_real(const std::string& cell, std::size_t line, const std::string& column) {
  const std::string t = trim(cell);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw Error(ErrorKind::ParseError,
                "row " + std::to_string(line) + ", column '" + column + "': '" + cell + "' is not a number");
  }
  return value;
}

std::int64_t parse_count(const std::string& cell, std::size_t line, const std::string& column) {
  const std::string t = trim(cell);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    // tolerate integral reals such as "12.0"
    const double real = parse_real(cell, line, column);
    if (real != std::floor(real)) {
      throw Error(ErrorKind::ParseError,
                  "row " + std::to_string(line) + ", column '" + column + "': '" + cell + "' is not an integer");
    }
    return static_cast<std::int64_t>(real);
  }
  return value;
}

std::string fold_name(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    const auto b0 = static_cast<unsigned char>(raw[i]);
    char32_t cp = 0;
    std::size_t len = 1;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      ++i;  // stray continuation byte
      continue;
    }
    bool valid = i + len <= raw.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      const auto b = static_cast<unsigned char>(raw[i + k]);
      if ((b & 0xC0) != 0x80) valid = false;
      else cp = (cp << 6) | (b & 0x3F);
    }
    if (!valid) {
      ++i;
      continue;
    }
    append_codepoint(out, cp);
    i += len;
  }
  return collapse_spaces(out);
}

}  // namespace

std::string normalize(std::string_view raw) { return normalize_name(raw).normalized; }

CountyKey normalize_name(std::string_view raw) {
  const std::string trimmed = trim(raw);
  if (trimmed.empty()) throw Error(ErrorKind::EmptyName, "county name is empty");
  std::string key = fold_name(trimmed);
  if (key.empty()) throw Error(ErrorKind::EmptyName, "county name '" + trimmed + "' normalizes to nothing");
  return {trimmed, std::move(key)};
}

Eigen::Index FeatureMatrix::find(std::string_view normalized) const {
  for (std::size_t i = 0; i < county_keys.size(); ++i) {
    if (county_keys[i].normalized == normalized) return static_cast<Eigen::Index>(i);
  }
  return -1;
}

void FeatureMatrix::validate() const {
  if (static_cast<Eigen::Index>(county_keys.size()) != values.rows() ||
      static_cast<Eigen::Index>(feature_names.size()) != values.cols()) {
    throw Error(ErrorKind::InvalidArgument, "feature matrix shape does not match its labels");
  }
  std::set<std::string> seen;
  for (const auto& key : county_keys) {
    if (!seen.insert(key.normalized).second) throw Error(ErrorKind::DuplicateCounty, key.normalized);
  }
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<Eigen::Index>& columns) const {
  FeatureMatrix out;
  out.county_keys = county_keys;
  out.values.resize(rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.values.col(static_cast<Eigen::Index>(j)) = values.col(columns[j]);
    out.feature_names.push_back(feature_names[static_cast<std::size_t>(columns[j])]);
  }
  return out;
}

FeatureMatrix load_profiles(const std::filesystem::path& path, const ProfileSchema& schema) {
  const csv::Table table = csv::read(path);
  const int name_col = table.column(schema.name_column);
  if (name_col < 0) throw Error(ErrorKind::MissingNameColumn, "'" + schema.name_column + "' not in header of " + path.string());

  std::vector<int> cols;
  FeatureMatrix m;
  if (schema.numeric_columns.empty()) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (static_cast<int>(j) == name_col) continue;
      cols.push_back(static_cast<int>(j));
      m.feature_names.push_back(table.header[j]);
    }
  } else {
    for (const auto& name : schema.numeric_columns) {
      const int j = table.column(name);
      if (j < 0) throw Error(ErrorKind::ParseError, "column '" + name + "' not in header of " + path.string());
      cols.push_back(j);
      m.feature_names.push_back(name);
    }
  }

  m.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols.size()));
  std::set<std::string> seen;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::size_t line = table.lines[i];
    if (row.size() != table.header.size()) {
      throw Error(ErrorKind::ParseError, "row " + std::to_string(line) + " has " + std::to_string(row.size()) +
                                             " fields, header has " + std::to_string(table.header.size()));
    }
    CountyKey key = normalize_name(row[static_cast<std::size_t>(name_col)]);
    if (!seen.insert(key.normalized).second) throw Error(ErrorKind::DuplicateCounty, key.normalized);
    m.county_keys.push_back(std::move(key));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_real(row[static_cast<std::size_t>(cols[j])], line, m.feature_names[j]);
    }
  }
  return m;
}

MergedProfiles merge_profiles(const std::vector<FeatureMatrix>& by_priority) {
  if (by_priority.empty()) throw Error(ErrorKind::EmptyMatrix, "no profile sources");
  if (by_priority.size() == 1) return {by_priority.front(), {}};

  MergedProfiles out;
  std::vector<std::pair<std::size_t, Eigen::Index>> source_of;  // feature -> (source, column)
  for (std::size_t s = 0; s < by_priority.size(); ++s) {
    const auto& src = by_priority[s];
    for (Eigen::Index j = 0; j < src.cols(); ++j) {
      const auto& name = src.feature_names[static_cast<std::size_t>(j)];
      if (std::find(out.matrix.feature_names.begin(), out.matrix.feature_names.end(), name) ==
          out.matrix.feature_names.end()) {
        out.matrix.feature_names.push_back(name);
        source_of.emplace_back(s, j);
      }
    }
  }

  const auto& first = by_priority.front();
  std::set<std::string> all_names;
  for (const auto& src : by_priority)
    for (const auto& key : src.county_keys) all_names.insert(key.normalized);

  std::vector<std::vector<Eigen::Index>> rows;  // per kept county, row in each source
  for (const auto& key : first.county_keys) {
    std::vector<Eigen::Index> r;
    for (const auto& src : by_priority) r.push_back(src.find(key.normalized));
    if (std::all_of(r.begin(), r.end(), [](Eigen::Index x) { return x >= 0; })) {
      out.matrix.county_keys.push_back(key);
      rows.push_back(std::move(r));
      all_names.erase(key.normalized);
    }
  }
  out.dropped_counties.assign(all_names.begin(), all_names.end());

  out.matrix.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(source_of.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < source_of.size(); ++j) {
      const auto [s, col] = source_of[j];
      out.matrix.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          by_priority[s].values(rows[i][s], col);
    }
  }
  return out;
}

FeatureMatrix drop_constant_columns(const FeatureMatrix& m, std::vector<std::string>* dropped) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const auto col = m.values.col(j);
    if (m.rows() > 0 && col.maxCoeff() > col.minCoeff()) {
      keep.push_back(j);
    } else if (dropped) {
      dropped->push_back(m.feature_names[static_cast<std::size_t>(j)]);
    }
  }
  return m.select_columns(keep);
}

PruneResult prune_correlated(const FeatureMatrix& m, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "correlation threshold must lie in (0, 1]");
  }
  if (m.cols() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two feature columns to prune");

  PruneResult out;
  const FeatureMatrix varying = drop_constant_columns(m, &out.degenerate);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < varying.cols(); ++j) {
    bool drop = false;
    for (Eigen::Index a : kept) {
      if (std::abs(pearson_correlation(varying.values.col(a), varying.values.col(j))) > threshold) {
        drop = true;
        break;
      }
    }
    if (drop) out.dropped.push_back(varying.feature_names[static_cast<std::size_t>(j)]);
    else kept.push_back(j);
  }
  out.matrix = varying.select_columns(kept);
  return out;
}

FeatureMatrix minmax_scale(const FeatureMatrix& m) {
  FeatureMatrix out = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double lo = m.values.col(j).minCoeff();
    const double hi = m.values.col(j).maxCoeff();
    if (!(hi > lo)) throw Error(ErrorKind::DegenerateColumn, m.feature_names[static_cast<std::size_t>(j)]);
    out.values.col(j) = (m.values.col(j).array() - lo) / (hi - lo);
    // pin the extremes so rescaling is an exact fixed point
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (m.values(i, j) == lo) out.values(i, j) = 0.0;
      else if (m.values(i, j) == hi) out.values(i, j) = 1.0;
    }
  }
  return out;
}

std::int64_t CaseSeries::total_deaths() const {
  std::int64_t total = 0;
  for (auto d : new_deaths) total += d;
  return total;
}

Eigen::VectorXd CaseSeries::daily_cases() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(new_cases.size()));
  for (std::size_t i = 0; i < new_cases.size(); ++i) v(static_cast<Eigen::Index>(i)) = static_cast<double>(new_cases[i]);
  return v;
}

Eigen::VectorXd CaseSeries::cumulative() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(cumulative_cases.size()));
  for (std::size_t i = 0; i < cumulative_cases.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = static_cast<double>(cumulative_cases[i]);
  return v;
}

CaseSeries make_case_series(const CountyKey& county, Date start, std::vector<std::int64_t> new_cases,
                            std::vector<std::int64_t> new_deaths, std::int64_t cumulative_before) {
  if (new_cases.empty()) throw Error(ErrorKind::EmptySeries, county.normalized);
  if (new_deaths.empty()) new_deaths.assign(new_cases.size(), 0);
  if (new_deaths.size() != new_cases.size()) {
    throw Error(ErrorKind::InvalidArgument, "cases and deaths differ in length for " + county.normalized);
  }
  CaseSeries s;
  s.county = county;
  s.dates.reserve(new_cases.size());
  s.cumulative_cases.reserve(new_cases.size());
  std::int64_t running = cumulative_before;
  for (std::size_t i = 0; i < new_cases.size(); ++i) {
    if (new_cases[i] < 0 || new_deaths[i] < 0) {
      throw Error(ErrorKind::InvalidArgument, "negative daily count for " + county.normalized);
    }
    s.dates.push_back(start + std::chrono::days{static_cast<int>(i)});
    running += new_cases[i];
    s.cumulative_cases.push_back(running);
  }
  s.new_cases = std::move(new_cases);
  s.new_deaths = std::move(new_deaths);
  return s;
}

CaseData load_case_series(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  const int c_date = table.column("date");
  const int c_county = table.column("county");
  const int c_cases = table.column("new_cases");
  const int c_deaths = table.column("new_deaths");
  if (c_county < 0) throw Error(ErrorKind::MissingNameColumn, "'county' not in header of " + path.string());
  if (c_date < 0 || c_cases < 0 || c_deaths < 0) {
    throw Error(ErrorKind::ParseError, path.string() + " needs columns date,county,new_cases,new_deaths");
  }
  if (table.rows.empty()) throw Error(ErrorKind::EmptySeries, "no data rows in " + path.string());

  struct Day {
    std::int64_t cases = 0;
    std::int64_t deaths = 0;
  };
  std::map<std::string, std::pair<CountyKey, std::map<Date, Day>>> raw;
  CaseData out;

  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::size_t line = table.lines[i];
    if (row.size() != table.header.size()) {
      throw Error(ErrorKind::ParseError, "row " + std::to_string(line) + " has " + std::to_string(row.size()) +
                                             " fields, header has " + std::to_string(table.header.size()));
    }
    Date date;
    try {
      date = parse_date(row[static_cast<std::size_t>(c_date)]);
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError, "row " + std::to_string(line) + ", column 'date': " + e.what());
    }
    CountyKey key = normalize_name(row[static_cast<std::size_t>(c_county)]);
    std::int64_t cases = parse_count(row[static_cast<std::size_t>(c_cases)], line, "new_cases");
    std::int64_t deaths = parse_count(row[static_cast<std::size_t>(c_deaths)], line, "new_deaths");
    const std::string day = format_date(date);
    if (cases < 0) {
      out.report.push_back({key.normalized, day, "negative_cases_clamped", "new_cases " + std::to_string(cases) + " -> 0"});
      cases = 0;
    }
    if (deaths < 0) {
      out.report.push_back({key.normalized, day, "negative_deaths_clamped", "new_deaths " + std::to_string(deaths) + " -> 0"});
      deaths = 0;
    }
    auto [it, inserted] = raw.try_emplace(key.normalized, key, std::map<Date, Day>{});
    auto& days = it->second.second;
    if (auto found = days.find(date); found != days.end()) {
      out.report.push_back({key.normalized, day, "duplicate_date_summed", "row " + std::to_string(line)});
      found->second.cases += cases;
      found->second.deaths += deaths;
    } else {
      days.emplace(date, Day{cases, deaths});
    }
  }

  for (auto& [name, entry] : raw) {
    auto& [key, days] = entry;
    const Date first = days.begin()->first;
    const Date last = days.rbegin()->first;
    std::vector<std::int64_t> cases, deaths;
    for (Date d = first; d <= last; d += std::chrono::days{1}) {
      if (auto it = days.find(d); it != days.end()) {
        cases.push_back(it->second.cases);
        deaths.push_back(it->second.deaths);
      } else {
        out.report.push_back({name, format_date(d), "missing_day_filled", "new_cases 0"});
        cases.push_back(0);
        deaths.push_back(0);
      }
    }
    out.series.emplace(name, make_case_series(key, first, std::move(cases), std::move(deaths)));
  }
  std::stable_sort(out.report.begin(), out.report.end(), [](const LoadWarning& a, const LoadWarning& b) {
    return std::tie(a.county, a.date) < std::tie(b.county, b.date);
  });
  return out;
}

CaseSeries slice_period(const CaseSeries& s, const Period& p) {
  std::size_t lo = s.size(), hi = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (p.contains(s.dates[i])) {
      lo = std::min(lo, i);
      hi = i + 1;
    }
  }
  if (lo >= hi) {
    throw Error(ErrorKind::EmptySlice, s.county.normalized + " has no data in " + format_period(p));
  }
  const std::int64_t before = s.cumulative_cases[lo] - s.new_cases[lo];
  return make_case_series(s.county, s.dates[lo],
                          {s.new_cases.begin() + static_cast<std::ptrdiff_t>(lo), s.new_cases.begin() + static_cast<std::ptrdiff_t>(hi)},
                          {s.new_deaths.begin() + static_cast<std::ptrdiff_t>(lo), s.new_deaths.begin() + static_cast<std::ptrdiff_t>(hi)},
                          before);
}

void write_load_report(std::ostream& out, const std::vector<LoadWarning>& report) {
  for (const auto& w : report) {
    nlohmann::ordered_json j;
    j["county"] = w.county;
    j["date"] = w.date;
    j["kind"] = w.kind;
    j["detail"] = w.detail;
    out << j.dump() << '\n';
  }
}

}  // namespace episignal
