#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "episignal/benford.hpp"
#include "episignal/cluster.hpp"
#include "episignal/csv.hpp"
#include "episignal/dataset.hpp"
#include "episignal/error.hpp"
#include "episignal/pipeline.hpp"
#include "episignal/report.hpp"
#include "episignal/sarima.hpp"

using namespace episignal;
namespace fs = std::filesystem;

namespace {

std::uint64_t seed_or_env(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  if (const char* env = std::getenv("EPISIGNAL_SEED"); env && *env) return std::stoull(env);
  return 0;
}

std::string write_matrix(const std::vector<std::string>& names, const Eigen::MatrixXd& m) {
  std::string out = "cluster";
  for (const auto& n : names) out += "," + csv::escape(n);
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += std::to_string(i);
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += "," + format_number(m(i, j));
    out += "\n";
  }
  return out;
}

struct ClusterArgs {
  std::vector<std::string> profiles;
  std::string name_col = "name";
  std::string k = "auto";
  int k_max = 10;
  std::optional<std::uint64_t> seed;
  int restarts = 10;
  double corr_threshold = 0.9;
  std::string cases;
  std::string out;
};

int run_cluster(const ClusterArgs& a) {
  ProfileSchema schema;
  schema.name_column = a.name_col;
  std::vector<FeatureMatrix> sources;
  for (const auto& p : a.profiles) sources.push_back(load_profiles(p, schema));
  const MergedProfiles merged = merge_profiles(sources);
  const FeatureMatrix& profiles = merged.matrix;

  PruneResult pr;
  if (profiles.cols() >= 2) {
    pr = prune_correlated(profiles, a.corr_threshold);
  } else {
    pr.matrix = drop_constant_columns(profiles, &pr.degenerate);
  }
  const FeatureMatrix scaled = minmax_scale(pr.matrix);
  const std::uint64_t seed = seed_or_env(a.seed);
  KMeansOptions opt;
  opt.restarts = a.restarts;
  const int n = static_cast<int>(scaled.rows());
  const int k_max = std::min(a.k_max, n);

  const ElbowCurve curve = elbow_scan(scaled.values, 1, k_max, seed, opt);
  std::optional<int> knee;
  if (curve.k_values.size() >= 3) knee = knee_detect(curve);
  const int k = a.k == "auto" ? knee.value_or(k_max) : std::stoi(a.k);
  const KMeansFit chosen = k <= k_max ? curve.fits[static_cast<std::size_t>(k - 1)]
                                      : kmeans_fit(scaled.values, k, seed + static_cast<std::uint64_t>(k), opt);

  std::string elbow = "k,sse,silhouette\n";
  for (std::size_t i = 0; i < curve.k_values.size(); ++i) {
    std::string sil;
    if (curve.k_values[i] >= 2 && curve.k_values[i] < n) {
      try {
        sil = format_number(silhouette(scaled.values, curve.fits[i].assignment));
      } catch (const Error&) {
      }
    }
    elbow += std::to_string(curve.k_values[i]) + "," + format_number(curve.sse[i]) + "," + sil + "\n";
  }
  std::string assignments = "county,cluster\n";
  for (std::size_t i = 0; i < profiles.county_keys.size(); ++i) {
    assignments += csv::escape(profiles.county_keys[i].normalized) + "," + std::to_string(chosen.assignment.labels[i]) + "\n";
  }

  std::map<std::string, CaseSeries> cases;
  if (!a.cases.empty()) cases = load_case_series(a.cases).series;
  Json summary;
  summary["k"] = chosen.model.k;
  summary["knee"] = knee ? Json(*knee) : Json(nullptr);
  summary["seed"] = seed;
  summary["inertia"] = chosen.model.inertia;
  summary["features_used"] = scaled.feature_names;
  summary["features_dropped_correlated"] = pr.dropped;
  summary["features_dropped_constant"] = pr.degenerate;
  summary["counties_dropped_in_merge"] = merged.dropped_counties;
  Json records = Json::array();
  for (const auto& rec : cluster_summary(profiles, cases, chosen.assignment)) records.push_back(to_json(rec, profiles.feature_names));
  summary["clusters"] = records;

  const fs::path out = a.out;
  write_file(out / "assignments.csv", assignments);
  write_file(out / "centroids.csv", write_matrix(scaled.feature_names, chosen.model.centroids));
  write_file(out / "elbow.csv", elbow);
  write_file(out / "summary.json", summary.dump(2) + "\n");
  std::cout << "k = " << chosen.model.k << ", " << profiles.rows() << " counties\n";
  return 0;
}

struct BenfordArgs {
  std::string cases;
  std::string periods;
  std::int64_t min_total = 5000;
  std::string signal = "cumulative";
  std::string out;
};

int run_benford(const BenfordArgs& a) {
  const CaseData data = load_case_series(a.cases);
  const std::vector<Period> periods = parse_periods(a.periods);
  AuditOptions opt;
  opt.min_total = a.min_total;
  opt.signal = parse_signal(a.signal);

  Json counties = Json::array();
  std::vector<AuditVerdict> verdicts;
  for (const auto& [name, series] : data.series) {
    try {
      verdicts.push_back(audit(series, periods, opt));
      counties.push_back(to_json(verdicts.back()));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SkippedBelowThreshold) throw;
      counties.push_back({{"county", name}, {"status", "skipped"}, {"reason", e.what()}});
    }
  }
  Json report;
  report["min_total"] = a.min_total;
  report["signal"] = std::string(to_string(opt.signal));
  report["counties"] = counties;
  std::ostringstream hist;
  write_digit_hist_csv(hist, verdicts);
  const fs::path out = a.out;
  write_file(out / "benford_report.json", report.dump(2) + "\n");
  write_file(out / "digit_hist.csv", hist.str());
  std::cout << verdicts.size() << " of " << data.series.size() << " counties audited\n";
  return 0;
}

struct ModelArgs {
  std::string cases;
  std::string county;
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
  int horizon = 20;
  double level = 0.95;
};

int run_model(const ModelArgs& a, bool with_forecast) {
  const SarimaSpec spec = SarimaSpec::parse(a.spec);
  const CaseData data = load_case_series(a.cases);
  const std::string key = normalize(a.county);
  const auto it = data.series.find(key);
  if (it == data.series.end()) throw Error(ErrorKind::MissingSeries, "no case series for '" + a.county + "'");
  const CaseSeries& series = it->second;
  const Eigen::VectorXd y = series.daily_cases();
  const FittedSarima f = fit(spec, y, seed_or_env(a.seed));

  Json model = to_json(f);
  model["county"] = key;
  const fs::path out = a.out;
  write_file(out / "model.json", model.dump(2) + "\n");
  std::ostringstream res;
  write_residuals_csv(res, f.residuals);
  write_file(out / "residuals.csv", res.str());
  if (with_forecast) {
    const Forecast fc = forecast(f, y, a.horizon, a.level);
    std::ostringstream csv;
    write_forecast_csv(csv, fc, series.dates.back());
    write_file(out / "forecast.csv", csv.str());
  }
  std::cout << spec.str() << " loglik " << format_number(f.loglik) << " aic " << format_number(f.aic) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch analytics for county epidemic series"};
  app.require_subcommand(1);

  ClusterArgs ca;
  auto* cluster = app.add_subcommand("cluster", "k-means clustering of county profiles");
  cluster->add_option("--profiles", ca.profiles, "Profile CSV files, highest priority first")->required();
  cluster->add_option("--name-col", ca.name_col, "Column holding the county name");
  cluster->add_option("--k", ca.k, "Cluster count or 'auto'");
  cluster->add_option("--k-max", ca.k_max, "Largest k on the elbow curve");
  cluster->add_option("--seed", ca.seed, "Random seed");
  cluster->add_option("--restarts", ca.restarts, "k-means restarts per k");
  cluster->add_option("--corr-threshold", ca.corr_threshold, "Correlation pruning threshold");
  cluster->add_option("--cases", ca.cases, "Case CSV for per-cluster means");
  cluster->add_option("--out", ca.out, "Output directory")->required();

  BenfordArgs ba;
  auto* benford = app.add_subcommand("benford", "First-digit audit of case series");
  benford->add_option("--cases", ba.cases, "Case CSV")->required();
  benford->add_option("--periods", ba.periods, "Comma-separated YYYY-MM-DD..YYYY-MM-DD periods")->required();
  benford->add_option("--min-total", ba.min_total, "Skip counties with at most this many cases");
  benford->add_option("--signal", ba.signal, "cumulative or daily");
  benford->add_option("--out", ba.out, "Output directory")->required();

  ModelArgs ma;
  auto add_model_options = [&](CLI::App* sub) {
    sub->add_option("--cases", ma.cases, "Case CSV")->required();
    sub->add_option("--county", ma.county, "County name")->required();
    sub->add_option("--spec", ma.spec, "Orders as (p,d,q)(P,D,Q)[s]")->required();
    sub->add_option("--out", ma.out, "Output directory")->required();
    sub->add_option("--seed", ma.seed, "Random seed");
  };
  auto* fit_cmd = app.add_subcommand("fit", "Fit a SARIMA model to one county");
  add_model_options(fit_cmd);
  auto* forecast_cmd = app.add_subcommand("forecast", "Fit and forecast one county");
  add_model_options(forecast_cmd);
  forecast_cmd->add_option("--horizon", ma.horizon, "Days ahead");
  forecast_cmd->add_option("--level", ma.level, "Interval coverage");

  std::string config;
  auto* pipeline = app.add_subcommand("pipeline", "End-to-end run");
  pipeline->add_option("--config", config, "key = value config file");
  pipeline->allow_extras();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cluster) return run_cluster(ca);
    if (*benford) return run_benford(ba);
    if (*fit_cmd) return run_model(ma, false);
    if (*forecast_cmd) return run_model(ma, true);
    if (*pipeline) {
      std::vector<std::pair<std::string, std::string>> flags;
      const std::vector<std::string> extras = pipeline->remaining();
      for (std::size_t i = 0; i < extras.size(); ++i) {
        std::string key = extras[i];
        if (key.rfind("--", 0) != 0) throw Error(ErrorKind::InvalidArgument, "unexpected argument '" + key + "'");
        key = key.substr(2);
        std::string value;
        if (const auto eq = key.find('='); eq != std::string::npos) {
          value = key.substr(eq + 1);
          key.erase(eq);
        } else {
          if (i + 1 >= extras.size()) throw Error(ErrorKind::InvalidArgument, "--" + key + " needs a value");
          value = extras[++i];
        }
        flags.emplace_back(key, value);
      }
      const RunConfig cfg = load_run_config(config.empty() ? std::nullopt : std::optional<fs::path>(config), flags);
      const RunSummary s = run_pipeline(cfg);
      if (s.exit_code != 0) {
        std::cerr << "episignal: stage '" << s.failed_stage << "' failed: " << s.message << "\n";
        return s.exit_code;
      }
      std::cout << "k = " << s.chosen_k << "; forecast " << s.forecasted << ", skipped " << s.skipped << ", errors "
                << s.errors << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "episignal: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "episignal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
