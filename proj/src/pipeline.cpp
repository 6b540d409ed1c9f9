#include "episignal/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "episignal/cluster.hpp"
#include "episignal/csv.hpp"
#include "episignal/dataset.hpp"
#include "episignal/error.hpp"
#include "episignal/report.hpp"

namespace episignal {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T v{};
  in >> v;
  if (!in || !(in >> std::ws).eof()) throw Error(ErrorKind::ParseError, "setting '" + key + "': '" + value + "' is not a number");
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

const SarimaSpec& ClusterParamTable::lookup(int cluster) const {
  const auto it = entries.find(cluster);
  if (it == entries.end()) throw Error(ErrorKind::MissingCluster, "no SARIMA orders for cluster " + std::to_string(cluster));
  return it->second;
}

std::string ClusterParamTable::str() const {
  std::string out;
  for (const auto& [cluster, spec] : entries) out += std::to_string(cluster) + "," + spec.str() + "\n";
  return out;
}

ClusterParamTable ClusterParamTable::parse(const std::string& text) {
  ClusterParamTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::ParseError, "param table line '" + line + "' is not cluster,spec");
    const int cluster = parse_number<int>("cluster", trim(line.substr(0, comma)));
    const SarimaSpec spec = SarimaSpec::parse(trim(line.substr(comma + 1)));
    if (first) table.s = spec.s;
    first = false;
    if (!table.entries.emplace(cluster, spec).second) {
      throw Error(ErrorKind::ParseError, "cluster " + std::to_string(cluster) + " listed twice");
    }
  }
  return table;
}

ClusterParamTable default_param_table(int s) {
  ClusterParamTable t;
  t.s = s;
  auto add = [&](int c, int p, int d, int q, int P, int D, int Q) { t.entries[c] = SarimaSpec{p, d, q, P, D, Q, s}; };
  add(0, 1, 1, 1, 1, 1, 1);
  add(1, 1, 1, 1, 0, 1, 1);
  add(2, 0, 1, 1, 0, 1, 1);
  add(3, 1, 1, 1, 1, 1, 1);
  add(4, 0, 1, 1, 0, 1, 1);
  add(5, 0, 1, 1, 0, 1, 1);
  add(6, 1, 1, 1, 0, 0, 0);
  add(7, 1, 1, 1, 1, 1, 1);
  add(8, 0, 1, 1, 0, 1, 1);
  return t;
}

ClusterParamTable load_param_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ClusterParamTable::parse(buf.str());
}

SarimaSpec capital_spec(int s) { return {1, 1, 1, 0, 1, 1, s}; }

// ---------------------------------------------------------------------------

HoldoutMetrics holdout_evaluate(const FittedSarima& f, const Eigen::VectorXd& y, int holdout, std::uint64_t seed,
                                const FitOptions& opt) {
  if (holdout < 1) throw Error(ErrorKind::InvalidArgument, "holdout must be at least 1");
  if (holdout >= y.size() - 10) {
    throw Error(ErrorKind::HoldoutTooLarge,
                "holdout " + std::to_string(holdout) + " leaves fewer than 10 points of " + std::to_string(y.size()));
  }
  const Eigen::VectorXd train = y.head(y.size() - holdout);
  const FittedSarima refit = fit(f.spec, train, seed, opt);
  const Forecast fc = forecast(refit, train, holdout);

  HoldoutMetrics m;
  m.holdout = holdout;
  m.actual = y.tail(holdout);
  m.predicted = fc.point;
  const Eigen::ArrayXd err = (m.predicted - m.actual).array();
  m.mae = err.abs().mean();
  m.rmse = std::sqrt(err.square().mean());
  double ape = 0.0;
  int used = 0;
  for (int i = 0; i < holdout; ++i) {
    if (m.actual(i) == 0.0) {
      ++m.mape_skipped;
      continue;
    }
    ape += std::abs(err(i) / m.actual(i));
    ++used;
  }
  m.mape = used > 0 ? 100.0 * ape / used : std::numeric_limits<double>::quiet_NaN();
  return m;
}

// ---------------------------------------------------------------------------

void RunConfig::validate() const {
  if (profiles.empty()) throw Error(ErrorKind::InvalidArgument, "no profiles file configured");
  if (cases.empty()) throw Error(ErrorKind::InvalidArgument, "no cases file configured");
  if (horizon < 1) throw Error(ErrorKind::HorizonZero, "horizon must be at least 1");
  if (holdout < 0) throw Error(ErrorKind::InvalidArgument, "holdout must be nonnegative");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "level must lie in (0, 1)");
  if (k && *k < 1) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  if (k_max < 1) throw Error(ErrorKind::InvalidArgument, "k_max must be at least 1");
  if (season < 2) throw Error(ErrorKind::InvalidArgument, "season must be at least 2");
  if (restarts < 1 || threads < 1) throw Error(ErrorKind::InvalidArgument, "restarts and threads must be positive");
}

void apply_setting(RunConfig& cfg, std::string key, const std::string& raw) {
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(raw);
  if (key == "profiles") {
    cfg.profiles.clear();
    for (const auto& p : split(value, ',')) cfg.profiles.emplace_back(p);
  } else if (key == "cases") {
    cfg.cases = value;
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "name_col") {
    cfg.name_col = value;
  } else if (key == "k") {
    if (value == "auto") cfg.k.reset();
    else cfg.k = parse_number<int>(key, value);
  } else if (key == "k_max") {
    cfg.k_max = parse_number<int>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "restarts") {
    cfg.restarts = parse_number<int>(key, value);
  } else if (key == "corr_threshold") {
    cfg.corr_threshold = parse_number<double>(key, value);
  } else if (key == "periods") {
    cfg.periods = parse_periods(value);
  } else if (key == "min_total") {
    cfg.min_total = parse_number<std::int64_t>(key, value);
  } else if (key == "signal") {
    cfg.signal = parse_signal(value);
  } else if (key == "horizon") {
    cfg.horizon = parse_number<int>(key, value);
  } else if (key == "holdout") {
    cfg.holdout = parse_number<int>(key, value);
  } else if (key == "level") {
    cfg.level = parse_number<double>(key, value);
  } else if (key == "season") {
    cfg.season = parse_number<int>(key, value);
  } else if (key == "param_table") {
    if (value.empty()) cfg.param_table.reset();
    else cfg.param_table = value;
  } else if (key == "capital_override") {
    if (value.empty()) cfg.capital_override.reset();
    else cfg.capital_override = normalize_name(value).normalized;
  } else if (key == "overrides") {
    cfg.overrides.clear();
    for (const auto& item : split(value, ';')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "override '" + item + "' is not county=spec");
      cfg.overrides[normalize_name(item.substr(0, eq)).normalized] = SarimaSpec::parse(trim(item.substr(eq + 1)));
    }
  } else if (key == "threads") {
    cfg.threads = parse_number<int>(key, value);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown setting '" + key + "'");
  }
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& file,
                          const std::vector<std::pair<std::string, std::string>>& flags) {
  RunConfig cfg;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorKind::Io, "cannot open config '" + file->string() + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::ParseError, file->string() + ":" + std::to_string(lineno) + " is not key = value");
      }
      apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
  }
  for (const auto& [key, value] : flags) apply_setting(cfg, key, value);
  if (!cfg.seed) {
    if (const char* env = std::getenv("EPISIGNAL_SEED"); env && *env) cfg.seed = parse_number<std::uint64_t>("EPISIGNAL_SEED", env);
  }
  return cfg;
}

std::string county_file_stem(const std::string& normalized) {
  std::string out = normalized;
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct CountyOutcome {
  enum class Status { forecast, skipped, error } status = Status::error;
  std::string reason;
  std::string stage;
  Json audit;
  std::string data_quality;
  std::optional<FittedSarima> model;
  std::optional<HoldoutMetrics> holdout;
  std::string holdout_note;
  std::optional<Forecast> forecast;
  int cluster = -1;
  std::string spec_source;
};

Json config_json(const RunConfig& cfg) {
  Json j;
  Json profiles = Json::array();
  for (const auto& p : cfg.profiles) profiles.push_back(p.generic_string());
  j["profiles"] = profiles;
  j["cases"] = cfg.cases.generic_string();
  j["name_col"] = cfg.name_col;
  j["k"] = cfg.k ? Json(*cfg.k) : Json("auto");
  j["k_max"] = cfg.k_max;
  j["seed"] = cfg.effective_seed();
  j["restarts"] = cfg.restarts;
  j["corr_threshold"] = cfg.corr_threshold;
  Json periods = Json::array();
  for (const auto& p : cfg.periods) periods.push_back(format_period(p));
  j["periods"] = periods;
  j["min_total"] = cfg.min_total;
  j["signal"] = std::string(to_string(cfg.signal));
  j["horizon"] = cfg.horizon;
  j["holdout"] = cfg.holdout;
  j["level"] = cfg.level;
  j["season"] = cfg.season;
  j["param_table"] = cfg.param_table ? Json(cfg.param_table->generic_string()) : Json(nullptr);
  j["capital_override"] = cfg.capital_override ? Json(*cfg.capital_override) : Json(nullptr);
  Json overrides = Json::object();
  for (const auto& [county, spec] : cfg.overrides) overrides[county] = spec.str();
  j["overrides"] = overrides;
  return j;
}

std::string matrix_csv(const std::vector<std::string>& names, const Eigen::MatrixXd& m) {
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

}  // namespace

RunSummary run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  const std::uint64_t seed = cfg.effective_seed();
  RunSummary summary;

  Json manifest;
  manifest["tool"] = "episignal";
  manifest["versions"] = {{"episignal", kVersion},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)}};
  manifest["config"] = config_json(cfg);
  manifest["seed"] = seed;

  auto fail = [&](const std::string& stage, const std::string& message) {
    summary.exit_code = 2;
    summary.failed_stage = stage;
    summary.message = message;
    manifest["status"] = "failed";
    manifest["failed_stage"] = stage;
    manifest["error"] = message;
    write_file(cfg.out / "manifest.json", manifest.dump(2) + "\n");
    return summary;
  };

  fs::create_directories(cfg.out);

  // Profiles and clustering.
  FeatureMatrix profiles;
  std::vector<std::string> dropped_counties;
  try {
    std::vector<FeatureMatrix> sources;
    ProfileSchema schema;
    schema.name_column = cfg.name_col;
    for (const auto& p : cfg.profiles) sources.push_back(load_profiles(p, schema));
    MergedProfiles merged = merge_profiles(sources);
    profiles = std::move(merged.matrix);
    dropped_counties = std::move(merged.dropped_counties);
    if (profiles.rows() == 0) throw Error(ErrorKind::EmptyMatrix, "no counties in the profile data");
  } catch (const Error& e) {
    return fail("profiles", e.what());
  }

  Json cluster_json;
  Assignment assignment;
  try {
    std::vector<std::string> correlated, degenerate;
    FeatureMatrix pruned;
    if (profiles.cols() >= 2) {
      PruneResult pr = prune_correlated(profiles, cfg.corr_threshold);
      pruned = std::move(pr.matrix);
      correlated = std::move(pr.dropped);
      degenerate = std::move(pr.degenerate);
    } else {
      pruned = drop_constant_columns(profiles, &degenerate);
    }
    if (pruned.cols() == 0) throw Error(ErrorKind::DegenerateColumn, "every feature column is constant");
    const FeatureMatrix scaled = minmax_scale(pruned);
    const auto n = static_cast<int>(scaled.rows());
    KMeansOptions kopt;
    kopt.restarts = cfg.restarts;

    std::string elbow = "k,sse,silhouette\n";
    Json silhouettes = Json::object();
    std::optional<int> knee;
    KMeansFit chosen;
    const int k_max = std::min(cfg.k_max, n);
    if (k_max >= 2) {
      const ElbowCurve curve = elbow_scan(scaled.values, 1, k_max, seed, kopt);
      for (std::size_t i = 0; i < curve.k_values.size(); ++i) {
        const int k = curve.k_values[i];
        std::string sil = "";
        if (k >= 2 && k < n) {
          try {
            const double s = silhouette(scaled.values, curve.fits[i].assignment);
            sil = format_number(s);
            silhouettes[std::to_string(k)] = s;
          } catch (const Error&) {
          }
        }
        elbow += std::to_string(k) + "," + format_number(curve.sse[i]) + "," + sil + "\n";
      }
      if (curve.k_values.size() >= 3) knee = knee_detect(curve);
      const int k = cfg.k ? *cfg.k : knee.value_or(k_max);
      if (k >= 1 && k <= k_max) chosen = curve.fits[static_cast<std::size_t>(k - 1)];
      else chosen = kmeans_fit(scaled.values, k, seed + static_cast<std::uint64_t>(k), kopt);
    } else {
      chosen = kmeans_fit(scaled.values, cfg.k.value_or(1), seed + 1, kopt);
      elbow += "1," + format_number(chosen.model.inertia) + ",\n";
    }
    assignment = chosen.assignment;
    summary.chosen_k = chosen.model.k;

    std::string assignments = "county,cluster\n";
    for (Eigen::Index i = 0; i < profiles.rows(); ++i) {
      assignments += csv::escape(profiles.county_keys[static_cast<std::size_t>(i)].normalized) + "," +
                     std::to_string(assignment.labels[static_cast<std::size_t>(i)]) + "\n";
    }
    write_file(cfg.out / "clusters" / "assignments.csv", assignments);
    write_file(cfg.out / "clusters" / "centroids.csv", matrix_csv(scaled.feature_names, chosen.model.centroids));
    write_file(cfg.out / "clusters" / "elbow.csv", elbow);

    cluster_json["k"] = chosen.model.k;
    cluster_json["k_source"] = cfg.k ? "fixed" : "elbow";
    cluster_json["knee"] = knee ? Json(*knee) : Json(nullptr);
    cluster_json["silhouette"] = silhouettes;
    if (knee && !silhouettes.empty()) {
      std::string best_k;
      double best = -2.0;
      for (const auto& [k, s] : silhouettes.items()) {
        if (s.get<double>() > best) {
          best = s.get<double>();
          best_k = k;
        }
      }
      cluster_json["silhouette_best_k"] = std::stoi(best_k);
      cluster_json["silhouette_confirms_knee"] = std::stoi(best_k) == *knee;
    }
    cluster_json["inertia"] = chosen.model.inertia;
    cluster_json["features_used"] = scaled.feature_names;
    cluster_json["features_dropped_correlated"] = correlated;
    cluster_json["features_dropped_constant"] = degenerate;
    cluster_json["counties_dropped_in_merge"] = dropped_counties;
  } catch (const Error& e) {
    return fail("cluster", e.what());
  }

  // Cases.
  CaseData cases;
  try {
    cases = load_case_series(cfg.cases);
  } catch (const Error& e) {
    return fail("cases", e.what());
  }
  {
    std::ostringstream report;
    write_load_report(report, cases.report);
    write_file(cfg.out / "load_report.jsonl", report.str());
  }
  {
    Json records = Json::array();
    for (const auto& rec : cluster_summary(profiles, cases.series, assignment)) records.push_back(to_json(rec, profiles.feature_names));
    cluster_json["clusters"] = records;
    write_file(cfg.out / "clusters" / "summary.json", cluster_json.dump(2) + "\n");
  }

  // Parameter table.
  ClusterParamTable table;
  try {
    table = cfg.param_table ? load_param_table(*cfg.param_table) : default_param_table(cfg.season);
  } catch (const Error& e) {
    return fail("param_table", e.what());
  }

  // Per-county audit, fit, holdout and forecast.
  std::vector<const CaseSeries*> counties;
  for (const auto& [_, s] : cases.series) counties.push_back(&s);
  std::vector<CountyOutcome> outcomes(counties.size());
  AuditOptions aopt;
  aopt.min_total = cfg.min_total;
  aopt.signal = cfg.signal;

  auto process = [&](std::size_t idx) {
    const CaseSeries& series = *counties[idx];
    const std::string& name = series.county.normalized;
    CountyOutcome& out = outcomes[idx];

    out.data_quality = "unaudited";
    if (cfg.periods.empty()) {
      out.audit = {{"county", name}, {"status", "not_run"}, {"reason", "no audit periods configured"}};
    } else {
      try {
        const AuditVerdict v = audit(series, cfg.periods, aopt);
        out.audit = to_json(v);
        out.audit["status"] = "audited";
        out.data_quality = v.classification == AuditClass::conforming ? "ok" : "suspect";
      } catch (const Error& e) {
        out.audit = {{"county", name},
                     {"status", e.kind() == ErrorKind::SkippedBelowThreshold ? "skipped" : "error"},
                     {"reason", e.what()}};
      }
    }
    out.audit["data_quality"] = out.data_quality;

    try {
      SarimaSpec spec;
      if (auto it = cfg.overrides.find(name); it != cfg.overrides.end()) {
        spec = it->second;
        out.spec_source = "override";
      } else if (cfg.capital_override && *cfg.capital_override == name) {
        spec = capital_spec(table.s);
        out.spec_source = "capital_override";
      }
      const Eigen::Index row = profiles.find(name);
      if (row >= 0) out.cluster = assignment.labels[static_cast<std::size_t>(row)];
      if (out.spec_source.empty()) {
        if (row < 0) throw Error(ErrorKind::MissingCluster, name + " has no sociodemographic profile");
        spec = table.lookup(out.cluster);
        out.spec_source = "cluster_table";
      }

      out.stage = "fit";
      const Eigen::VectorXd y = series.daily_cases();
      FittedSarima model = fit(spec, y, seed);
      if (cfg.holdout > 0) {
        out.stage = "holdout";
        try {
          out.holdout = holdout_evaluate(model, y, cfg.holdout, seed);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::HoldoutTooLarge && e.kind() != ErrorKind::TooShort) throw;
          out.holdout_note = e.what();
        }
      }
      out.stage = "forecast";
      out.forecast = forecast(model, y, cfg.horizon, cfg.level);
      out.model = std::move(model);
      out.status = CountyOutcome::Status::forecast;
    } catch (const Error& e) {
      out.reason = e.what();
      out.status = e.kind() == ErrorKind::TooShort ? CountyOutcome::Status::skipped : CountyOutcome::Status::error;
      if (out.stage.empty()) out.stage = "spec_lookup";
    }
  };

  const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(counties.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < counties.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < counties.size(); i = next++) process(i);
      });
    }
  }

  // Single-writer merge in county order.
  Json forecasted = Json::array(), skipped = Json::array(), errors = Json::array();
  std::set<std::string> specs_used;
  for (std::size_t i = 0; i < counties.size(); ++i) {
    const CaseSeries& series = *counties[i];
    const std::string& name = series.county.normalized;
    const std::string stem = county_file_stem(name);
    CountyOutcome& out = outcomes[i];
    write_file(cfg.out / "audits" / (stem + ".json"), out.audit.dump(2) + "\n");

    if (out.status == CountyOutcome::Status::forecast) {
      Json model = to_json(*out.model);
      model["county"] = name;
      model["cluster"] = out.cluster >= 0 ? Json(out.cluster) : Json(nullptr);
      model["spec_source"] = out.spec_source;
      model["data_quality"] = out.data_quality;
      model["holdout"] = out.holdout ? to_json(*out.holdout) : Json(nullptr);
      if (!out.holdout_note.empty()) model["holdout_note"] = out.holdout_note;
      write_file(cfg.out / "models" / (stem + ".json"), model.dump(2) + "\n");
      std::ostringstream fc;
      write_forecast_csv(fc, *out.forecast, series.dates.back());
      write_file(cfg.out / "forecasts" / (stem + ".csv"), fc.str());
      forecasted.push_back({{"county", name}, {"spec", out.model->spec.str()}, {"data_quality", out.data_quality}});
      specs_used.insert(out.model->spec.str());
    } else if (out.status == CountyOutcome::Status::skipped) {
      skipped.push_back({{"county", name}, {"reason", out.reason}});
    } else {
      errors.push_back({{"county", name}, {"stage", out.stage}, {"reason", out.reason}});
    }
  }
  summary.forecasted = static_cast<int>(forecasted.size());
  summary.skipped = static_cast<int>(skipped.size());
  summary.errors = static_cast<int>(errors.size());
  summary.distinct_specs.assign(specs_used.begin(), specs_used.end());

  Json report;
  report["forecasted"] = forecasted;
  report["skipped"] = skipped;
  report["errors"] = errors;
  write_file(cfg.out / "report.json", report.dump(2) + "\n");

  manifest["k"] = summary.chosen_k;
  manifest["param_table"] = table.str();
  manifest["counts"] = {{"profiles", profiles.rows()},
                        {"case_series", counties.size()},
                        {"forecasted", summary.forecasted},
                        {"skipped", summary.skipped},
                        {"errors", summary.errors}};
  manifest["distinct_specs"] = summary.distinct_specs;
  const bool all_failed = !counties.empty() && summary.forecasted == 0;
  manifest["status"] = all_failed ? "failed" : "ok";
  if (all_failed) {
    summary.exit_code = 3;
    summary.failed_stage = "forecast";
    summary.message = "no county could be forecast";
    manifest["failed_stage"] = "forecast";
  }
  write_file(cfg.out / "manifest.json", manifest.dump(2) + "\n");
  return summary;
}

}  // namespace episignal
