#include "episignal/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "episignal/error.hpp"

namespace episignal {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

namespace {

Json vector_json(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(json_number(v(i)));
  return arr;
}

}  // namespace

Json to_json(const SarimaParams& p) {
  Json j;
  j["phi"] = vector_json(p.phi);
  j["theta"] = vector_json(p.theta);
  j["seasonal_phi"] = vector_json(p.seasonal_phi);
  j["seasonal_theta"] = vector_json(p.seasonal_theta);
  j["sigma2"] = json_number(p.sigma2);
  return j;
}

Json to_json(const FittedSarima& f) {
  Json j;
  j["spec"] = f.spec.str();
  j["orders"] = {{"p", f.spec.p}, {"d", f.spec.d}, {"q", f.spec.q}, {"P", f.spec.P},
                 {"D", f.spec.D}, {"Q", f.spec.Q}, {"s", f.spec.s}};
  j["params"] = to_json(f.params);
  j["mean"] = json_number(f.mean);
  j["loglik"] = json_number(f.loglik);
  j["aic"] = json_number(f.aic);
  j["n_params"] = f.spec.n_params();
  j["n_residuals"] = f.residuals.size();
  j["converged"] = f.converged;
  j["degenerate"] = f.degenerate;
  return j;
}

Json to_json(const HoldoutMetrics& m) {
  Json j;
  j["holdout"] = m.holdout;
  j["mae"] = json_number(m.mae);
  j["rmse"] = json_number(m.rmse);
  j["mape_percent"] = json_number(m.mape);
  j["mape_skipped"] = m.mape_skipped;
  return j;
}

Json to_json(const BenfordReport& r) {
  const auto p = benford_pmf();
  Json j;
  j["period"] = format_period(r.period);
  j["n"] = r.histogram.n;
  j["skipped"] = r.skipped;
  Json counts = Json::array();
  Json expected = Json::array();
  for (std::size_t d = 0; d < 9; ++d) {
    counts.push_back(r.histogram.counts[d]);
    expected.push_back(static_cast<double>(r.histogram.n) * p[d]);
  }
  j["counts"] = counts;
  j["expected"] = expected;
  j["chi2"] = {{"statistic", json_number(r.chi2.statistic)}, {"pass", r.chi2.pass}, {"low_expected_counts", r.low_expected_counts}};
  j["ks"] = {{"statistic", json_number(r.ks.statistic)}, {"critical", json_number(r.ks_critical)}, {"pass", r.ks.pass}};
  j["mad"] = {{"value", json_number(r.mad.value)}, {"band", std::string(to_string(r.mad.band))}};
  Json z = Json::array();
  for (double v : r.z) z.push_back(json_number(v));
  j["z"] = z;
  j["z_significant"] = r.z_significant;
  j["mantissa_mean"] = json_number(r.mantissa_mean);
  j["pass"] = r.passes();
  return j;
}

Json to_json(const AuditVerdict& v) {
  Json j;
  j["county"] = v.county;
  j["classification"] = std::string(to_string(v.classification));
  j["rationale"] = v.rationale;
  Json periods = Json::array();
  for (const auto& p : v.periods) {
    if (p.report) {
      periods.push_back(to_json(*p.report));
    } else {
      periods.push_back({{"period", format_period(p.period)}, {"note", p.note}});
    }
  }
  j["periods"] = periods;
  return j;
}

Json to_json(const ClusterRecord& r, const std::vector<std::string>& feature_names) {
  Json j;
  j["cluster"] = r.cluster;
  j["size"] = r.counties.size();
  j["counties"] = r.counties;
  Json means;
  for (std::size_t i = 0; i < feature_names.size() && static_cast<Eigen::Index>(i) < r.feature_means.size(); ++i) {
    means[feature_names[i]] = json_number(r.feature_means(static_cast<Eigen::Index>(i)));
  }
  j["feature_means"] = means;
  j["mean_cases"] = r.mean_cases ? Json(*r.mean_cases) : Json(nullptr);
  j["mean_deaths"] = r.mean_deaths ? Json(*r.mean_deaths) : Json(nullptr);
  j["case_means_absent"] = !r.mean_cases.has_value();
  j["missing_series"] = r.missing_series;
  return j;
}

void write_forecast_csv(std::ostream& out, const Forecast& f, Date last) {
  out << "date,point,lower,upper\n";
  for (int i = 0; i < f.horizon; ++i) {
    out << format_date(last + std::chrono::days{i + 1}) << ',' << format_number(f.point(i)) << ','
        << format_number(f.lower(i)) << ',' << format_number(f.upper(i)) << '\n';
  }
}

void write_residuals_csv(std::ostream& out, const Eigen::VectorXd& residuals) {
  out << "index,residual\n";
  for (Eigen::Index i = 0; i < residuals.size(); ++i) out << i << ',' << format_number(residuals(i)) << '\n';
}

void write_digit_hist_csv(std::ostream& out, const std::vector<AuditVerdict>& audits) {
  const auto p = benford_pmf();
  out << "county,period,digit,count,observed,expected\n";
  for (const auto& v : audits) {
    for (const auto& period : v.periods) {
      if (!period.report) continue;
      const auto& h = period.report->histogram;
      for (int d = 1; d <= 9; ++d) {
        out << v.county << ',' << format_period(period.period) << ',' << d << ',' << h.count(d) << ','
            << format_number(h.proportion(d)) << ',' << format_number(p[static_cast<std::size_t>(d - 1)]) << '\n';
      }
    }
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

}  // namespace episignal
