#include "episignal/benford.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "episignal/error.hpp"

namespace episignal {

std::array<double, 9> benford_pmf() {
  std::array<double, 9> p{};
  for (int d = 1; d <= 9; ++d) p[static_cast<std::size_t>(d - 1)] = std::log10(1.0 + 1.0 / d);
  return p;
}

int first_digit(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorKind::NonPositive, "first digit needs a positive finite value, got " + std::to_string(x));
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific);
  (void)res;
  return buf[0] - '0';
}

DigitHistogram DigitHistogram::from_counts(const std::array<std::int64_t, 9>& counts) {
  DigitHistogram h;
  h.counts = counts;
  h.n = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  if (h.n < 1) throw Error(ErrorKind::EmptyAfterFilter, "histogram has no observations");
  return h;
}

HistogramResult digit_histogram(std::span<const double> values) {
  HistogramResult out;
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      ++out.skipped;
      continue;
    }
    ++out.histogram.counts[static_cast<std::size_t>(first_digit(v) - 1)];
    ++out.histogram.n;
  }
  if (out.histogram.n == 0) {
    throw Error(ErrorKind::EmptyAfterFilter, std::to_string(out.skipped) + " values, none positive");
  }
  return out;
}

TestResult chi_square(const DigitHistogram& h, const BenfordThresholds& t) {
  const auto p = benford_pmf();
  const auto n = static_cast<double>(h.n);
  double stat = 0.0;
  for (std::size_t d = 0; d < 9; ++d) {
    const double expected = n * p[d];
    const double diff = static_cast<double>(h.counts[d]) - expected;
    stat += diff * diff / expected;
  }
  return {stat, stat < t.chi2_critical};
}

bool chi_square_low_expected(const DigitHistogram& h) {
  const auto p = benford_pmf();
  return static_cast<double>(h.n) * p[8] < 5.0;
}

double ks_critical(std::int64_t n, const BenfordThresholds& t) {
  return t.ks_coefficient / std::sqrt(static_cast<double>(n));
}

TestResult ks_statistic(const DigitHistogram& h, const BenfordThresholds& t) {
  const auto p = benford_pmf();
  double observed = 0.0, expected = 0.0, sup = 0.0;
  for (std::size_t d = 0; d < 9; ++d) {
    observed += static_cast<double>(h.counts[d]) / static_cast<double>(h.n);
    expected += p[d];
    sup = std::max(sup, std::abs(observed - expected));
  }
  return {sup, sup < ks_critical(h.n, t)};
}

std::string_view to_string(MadBand band) {
  switch (band) {
    case MadBand::close: return "close";
    case MadBand::acceptable: return "acceptable";
    case MadBand::marginal: return "marginal";
    case MadBand::nonconforming: return "nonconforming";
  }
  return "nonconforming";
}

MadResult mad(const DigitHistogram& h, const BenfordThresholds& t) {
  const auto p = benford_pmf();
  double sum = 0.0;
  for (std::size_t d = 0; d < 9; ++d) sum += std::abs(h.proportion(static_cast<int>(d + 1)) - p[d]);
  const double value = sum / 9.0;
  MadBand band = MadBand::nonconforming;
  if (value < t.mad_close) band = MadBand::close;
  else if (value < t.mad_acceptable) band = MadBand::acceptable;
  else if (value < t.mad_marginal) band = MadBand::marginal;
  return {value, band};
}

std::array<double, 9> z_scores(const DigitHistogram& h) {
  const auto p = benford_pmf();
  const auto n = static_cast<double>(h.n);
  std::array<double, 9> z{};
  for (std::size_t d = 0; d < 9; ++d) {
    const double dev = std::abs(static_cast<double>(h.counts[d]) / n - p[d]) - 1.0 / (2.0 * n);
    z[d] = dev > 0.0 ? dev / std::sqrt(p[d] * (1.0 - p[d]) / n) : 0.0;
  }
  return z;
}

MantissaStats mantissa_stats(std::span<const double> values) {
  MantissaStats out;
  double sum = 0.0;
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) continue;
    const double l = std::log10(v);
    sum += l - std::floor(l);
    ++out.count;
  }
  if (out.count == 0) throw Error(ErrorKind::EmptyAfterFilter, "no positive values for mantissa statistics");
  out.mean = sum / static_cast<double>(out.count);
  return out;
}

BenfordReport benford_report(std::span<const double> values, const Period& period, const BenfordThresholds& t) {
  BenfordReport r;
  r.period = period;
  const HistogramResult hist = digit_histogram(values);
  r.histogram = hist.histogram;
  r.skipped = hist.skipped;
  r.low_expected_counts = chi_square_low_expected(r.histogram);
  r.chi2 = chi_square(r.histogram, t);
  r.ks = ks_statistic(r.histogram, t);
  r.ks_critical = ks_critical(r.histogram.n, t);
  r.mad = mad(r.histogram, t);
  r.z = z_scores(r.histogram);
  r.z_significant = static_cast<int>(std::count_if(r.z.begin(), r.z.end(), [&](double z) { return z > t.z_critical; }));
  r.mantissa_mean = mantissa_stats(values).mean;
  return r;
}

std::string_view to_string(AuditClass c) {
  switch (c) {
    case AuditClass::conforming: return "conforming";
    case AuditClass::flattening_suspected: return "flattening_suspected";
    case AuditClass::underreporting_suspected: return "underreporting_suspected";
    case AuditClass::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

AuditSignal parse_signal(std::string_view text) {
  if (text == "cumulative") return AuditSignal::cumulative;
  if (text == "daily") return AuditSignal::daily;
  throw Error(ErrorKind::InvalidArgument, "signal must be 'cumulative' or 'daily', got '" + std::string(text) + "'");
}

std::string_view to_string(AuditSignal s) { return s == AuditSignal::cumulative ? "cumulative" : "daily"; }

std::pair<AuditClass, std::string> classify(const std::vector<PeriodOutcome>& periods, const BenfordThresholds& t) {
  std::vector<const BenfordReport*> reports;
  for (const auto& p : periods)
    if (p.report) reports.push_back(&*p.report);
  if (reports.empty()) return {AuditClass::inconclusive, "no period had data to test"};

  const bool complete = reports.size() == periods.size();
  const bool all_pass = std::all_of(reports.begin(), reports.end(), [](const BenfordReport* r) { return r->passes(); });
  if (complete && all_pass) return {AuditClass::conforming, "every period passes chi-square and KS"};

  const BenfordReport& first = *reports.front();
  const BenfordReport& last = *reports.back();
  if (first.passes() && !last.passes() && last.mantissa_mean >= t.mantissa_expected) {
    return {AuditClass::flattening_suspected,
            "earliest period conforms, latest does not, latest mantissa mean " + std::to_string(last.mantissa_mean) +
                " >= " + std::to_string(t.mantissa_expected)};
  }
  if (last.mantissa_mean < t.mantissa_expected) {
    return {AuditClass::underreporting_suspected,
            "latest mantissa mean " + std::to_string(last.mantissa_mean) + " < " + std::to_string(t.mantissa_expected)};
  }
  if (!first.passes() && last.passes()) {
    return {AuditClass::underreporting_suspected, "earliest period fails while the latest conforms"};
  }
  return {AuditClass::inconclusive, "mixed results without a recognised pattern"};
}

AuditVerdict audit(const CaseSeries& series, const std::vector<Period>& periods, const AuditOptions& opt) {
  if (series.total_cases() <= opt.min_total) {
    throw Error(ErrorKind::SkippedBelowThreshold, series.county.normalized + " has " + std::to_string(series.total_cases()) +
                                                      " cases, threshold " + std::to_string(opt.min_total));
  }
  if (periods.empty()) throw Error(ErrorKind::InvalidArgument, "audit needs at least one period");

  std::vector<Period> ordered = periods;
  std::stable_sort(ordered.begin(), ordered.end(), [](const Period& a, const Period& b) { return a.end < b.end; });

  AuditVerdict verdict;
  verdict.county = series.county.normalized;
  for (const auto& period : ordered) {
    PeriodOutcome outcome{period, std::nullopt, {}};
    try {
      const CaseSeries slice = slice_period(series, period);
      const Eigen::VectorXd values = opt.signal == AuditSignal::cumulative ? slice.cumulative() : slice.daily_cases();
      outcome.report = benford_report(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())), period,
                                      opt.thresholds);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptySlice && e.kind() != ErrorKind::EmptyAfterFilter) throw;
      outcome.note = e.what();
    }
    verdict.periods.push_back(std::move(outcome));
  }
  auto [cls, why] = classify(verdict.periods, opt.thresholds);
  verdict.classification = cls;
  verdict.rationale = std::move(why);
  return verdict;
}

}  // namespace episignal
