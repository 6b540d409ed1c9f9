#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "episignal/date.hpp"

namespace episignal {

/// Merge key for a county. `normalized` is lowercase ASCII letters, digits,
/// hyphens and single spaces; accents are stripped.
struct CountyKey {
  std::string raw_name;
  std::string normalized;

  friend bool operator==(const CountyKey& a, const CountyKey& b) { return a.normalized == b.normalized; }
  friend auto operator<=>(const CountyKey& a, const CountyKey& b) { return a.normalized <=> b.normalized; }
};

/// Throws EmptyName when nothing survives normalization.
CountyKey normalize_name(std::string_view raw);
/// The normalized key alone. Throws EmptyName.
std::string normalize(std::string_view raw);

/// Rows are counties, columns are sociodemographic features.
struct FeatureMatrix {
  std::vector<CountyKey> county_keys;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  /// Row index of a normalized name, or -1.
  Eigen::Index find(std::string_view normalized) const;
  /// Checks shape agreement and key uniqueness. Throws DuplicateCounty / InvalidArgument.
  void validate() const;
  FeatureMatrix select_columns(const std::vector<Eigen::Index>& columns) const;
};

struct ProfileSchema {
  std::string name_column = "name";
  /// Columns to parse; empty means every column except the name column.
  std::vector<std::string> numeric_columns;
};

FeatureMatrix load_profiles(const std::filesystem::path& path, const ProfileSchema& schema = {});

struct MergedProfiles {
  FeatureMatrix matrix;
  /// Counties absent from at least one source.
  std::vector<std::string> dropped_counties;
};

/// Joins several profile sources listed highest priority first. Counties must be
/// present in every source; a feature found in more than one source takes the
/// value from the highest-priority source holding it.
MergedProfiles merge_profiles(const std::vector<FeatureMatrix>& by_priority);

template <typename DerivedA, typename DerivedB>
double pearson_correlation(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  const auto n = a.size();
  const double ma = a.mean();
  const double mb = b.mean();
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double da = a(i) - ma;
    const double db = b(i) - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

struct PruneResult {
  FeatureMatrix matrix;
  /// Dropped for exceeding the correlation threshold against an earlier column.
  std::vector<std::string> dropped;
  /// Dropped for zero variance.
  std::vector<std::string> degenerate;
};

/// Greedy scan in column order; a column is dropped when |r| > threshold against
/// any retained earlier column. Constant columns are dropped and reported first.
PruneResult prune_correlated(const FeatureMatrix& m, double threshold = 0.9);

/// Removes zero-variance columns, appending their names to `dropped` if given.
FeatureMatrix drop_constant_columns(const FeatureMatrix& m, std::vector<std::string>* dropped = nullptr);

/// Column-wise (x - min) / (max - min). Throws DegenerateColumn when min == max.
FeatureMatrix minmax_scale(const FeatureMatrix& m);

/// Daily counts for one county over a gap-free date range.
struct CaseSeries {
  CountyKey county;
  std::vector<Date> dates;
  std::vector<std::int64_t> new_cases;
  std::vector<std::int64_t> new_deaths;
  std::vector<std::int64_t> cumulative_cases;

  std::size_t size() const { return dates.size(); }
  bool empty() const { return dates.empty(); }
  std::int64_t total_cases() const { return cumulative_cases.empty() ? 0 : cumulative_cases.back(); }
  std::int64_t total_deaths() const;

  Eigen::VectorXd daily_cases() const;
  Eigen::VectorXd cumulative() const;
};

/// Builds a series starting at `start`; cumulative counts start from `cumulative_before`.
/// Throws EmptySeries for empty input and InvalidArgument for negative counts.
CaseSeries make_case_series(const CountyKey& county, Date start, std::vector<std::int64_t> new_cases,
                            std::vector<std::int64_t> new_deaths = {}, std::int64_t cumulative_before = 0);

struct LoadWarning {
  std::string county;
  std::string date;
  std::string kind;
  std::string detail;
};

struct CaseData {
  /// Keyed by normalized county name.
  std::map<std::string, CaseSeries> series;
  std::vector<LoadWarning> report;
};

/// Long-format `date,county,new_cases,new_deaths` file. Missing days are filled
/// with zeros, negative counts clamped to zero, duplicate rows summed; each such
/// repair is recorded in the report.
CaseData load_case_series(const std::filesystem::path& path);

/// Restriction of a series to a period. Throws EmptySlice when they do not overlap.
CaseSeries slice_period(const CaseSeries& s, const Period& p);

/// One JSON object per line: {county, date, kind, detail}.
void write_load_report(std::ostream& out, const std::vector<LoadWarning>& report);

}  // namespace episignal
