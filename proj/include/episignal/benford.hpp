#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "episignal/dataset.hpp"
#include "episignal/date.hpp"

namespace episignal {

/// P(d) = log10(1 + 1/d) for leading digits d = 1..9 (index d - 1).
std::array<double, 9> benford_pmf();

/// Leading significant digit of the shortest decimal form of x.
/// Throws NonPositive for x <= 0, NaN or infinity.
int first_digit(double x);

struct DigitHistogram {
  std::array<std::int64_t, 9> counts{};
  std::int64_t n = 0;

  std::int64_t count(int digit) const { return counts[static_cast<std::size_t>(digit - 1)]; }
  double proportion(int digit) const { return static_cast<double>(count(digit)) / static_cast<double>(n); }
  static DigitHistogram from_counts(const std::array<std::int64_t, 9>& counts);
};

struct HistogramResult {
  DigitHistogram histogram;
  /// Zeros, negatives and non-finite values that were ignored.
  std::int64_t skipped = 0;
};

/// Throws EmptyAfterFilter when no positive finite value remains.
HistogramResult digit_histogram(std::span<const double> values);

struct BenfordThresholds {
  /// Chi-square 0.95 quantile with 8 degrees of freedom.
  double chi2_critical = 15.507;
  /// Asymptotic KS coefficient at 5 %: the cutoff is ks_coefficient / sqrt(n).
  double ks_coefficient = 1.36;
  double mad_close = 0.006;
  double mad_acceptable = 0.012;
  double mad_marginal = 0.015;
  /// Two-sided 5 % normal critical value for the per-digit z tests.
  double z_critical = 1.96;
  /// Mantissa mean expected under the law.
  double mantissa_expected = 0.5;
};

struct TestResult {
  double statistic = 0.0;
  bool pass = false;
};

TestResult chi_square(const DigitHistogram& h, const BenfordThresholds& t = {});
/// True when some expected count n * p_d is below 5.
bool chi_square_low_expected(const DigitHistogram& h);

TestResult ks_statistic(const DigitHistogram& h, const BenfordThresholds& t = {});
double ks_critical(std::int64_t n, const BenfordThresholds& t = {});

enum class MadBand { close, acceptable, marginal, nonconforming };
std::string_view to_string(MadBand band);

struct MadResult {
  double value = 0.0;
  MadBand band = MadBand::close;
};
MadResult mad(const DigitHistogram& h, const BenfordThresholds& t = {});

/// Continuity-corrected proportion z statistic per digit, floored at zero.
std::array<double, 9> z_scores(const DigitHistogram& h);

struct MantissaStats {
  double mean = 0.0;
  std::int64_t count = 0;
};
/// Mean of frac(log10 x) over the positive finite values. Throws EmptyAfterFilter.
MantissaStats mantissa_stats(std::span<const double> values);

struct BenfordReport {
  Period period;
  DigitHistogram histogram;
  std::int64_t skipped = 0;
  bool low_expected_counts = false;
  TestResult chi2;
  TestResult ks;
  double ks_critical = 0.0;
  MadResult mad;
  std::array<double, 9> z{};
  int z_significant = 0;
  double mantissa_mean = 0.0;

  bool passes() const { return chi2.pass && ks.pass; }
};

/// Full statistics for one set of values.
BenfordReport benford_report(std::span<const double> values, const Period& period, const BenfordThresholds& t = {});

enum class AuditClass { conforming, flattening_suspected, underreporting_suspected, inconclusive };
std::string_view to_string(AuditClass c);

enum class AuditSignal { cumulative, daily };
AuditSignal parse_signal(std::string_view text);
std::string_view to_string(AuditSignal s);

struct PeriodOutcome {
  Period period;
  /// Empty when the period holds no positive values.
  std::optional<BenfordReport> report;
  std::string note;
};

struct AuditVerdict {
  std::string county;
  std::vector<PeriodOutcome> periods;
  AuditClass classification = AuditClass::inconclusive;
  std::string rationale;
};

struct AuditOptions {
  std::int64_t min_total = 5000;
  AuditSignal signal = AuditSignal::cumulative;
  BenfordThresholds thresholds{};
};

/// Decision rule over period outcomes ordered by end date.
std::pair<AuditClass, std::string> classify(const std::vector<PeriodOutcome>& periods,
                                            const BenfordThresholds& t = {});

/// Per-period digit tests on a county's series. Throws SkippedBelowThreshold when
/// the total case count does not exceed `min_total`.
AuditVerdict audit(const CaseSeries& series, const std::vector<Period>& periods, const AuditOptions& opt = {});

}  // namespace episignal
