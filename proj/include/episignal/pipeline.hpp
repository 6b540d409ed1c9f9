#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "episignal/benford.hpp"
#include "episignal/date.hpp"
#include "episignal/sarima.hpp"

namespace episignal {

/// Cluster id -> SARIMA orders shared by every county of the cluster.
struct ClusterParamTable {
  int s = 7;
  std::map<int, SarimaSpec> entries;

  /// Throws MissingCluster.
  const SarimaSpec& lookup(int cluster) const;
  /// One `cluster,spec` line per entry.
  std::string str() const;
  static ClusterParamTable parse(const std::string& text);
};

/// Nine-cluster table used for the Sao Paulo counties, seasonal period `s`.
ClusterParamTable default_param_table(int s = 7);
ClusterParamTable load_param_table(const std::filesystem::path& path);

/// Orders applied to a county flagged as the capital, irrespective of its cluster.
SarimaSpec capital_spec(int s = 7);

struct HoldoutMetrics {
  int holdout = 0;
  double mae = 0.0;
  double rmse = 0.0;
  /// Percent; actual values equal to zero are skipped.
  double mape = 0.0;
  int mape_skipped = 0;
  Eigen::VectorXd actual;
  Eigen::VectorXd predicted;
};

/// Refits f.spec on all but the last `holdout` points and scores the forecast
/// of those points. Throws HoldoutTooLarge when holdout >= len - 10.
HoldoutMetrics holdout_evaluate(const FittedSarima& f, const Eigen::VectorXd& y, int holdout, std::uint64_t seed = 0,
                                const FitOptions& opt = {});

struct RunConfig {
  /// Profile sources, highest priority first.
  std::vector<std::filesystem::path> profiles;
  std::filesystem::path cases;
  std::filesystem::path out = "episignal-out";
  std::string name_col = "name";
  /// Fixed cluster count; empty selects k from the elbow curve.
  std::optional<int> k;
  int k_max = 10;
  std::optional<std::uint64_t> seed;
  int restarts = 10;
  double corr_threshold = 0.9;
  std::vector<Period> periods;
  std::int64_t min_total = 5000;
  AuditSignal signal = AuditSignal::cumulative;
  int horizon = 20;
  int holdout = 20;
  double level = 0.95;
  int season = 7;
  std::optional<std::filesystem::path> param_table;
  /// County given the capital orders regardless of its cluster.
  std::optional<std::string> capital_override;
  /// Normalized county name -> orders.
  std::map<std::string, SarimaSpec> overrides;
  int threads = 1;

  /// Throws InvalidArgument / Io.
  void validate() const;
  std::uint64_t effective_seed() const { return seed.value_or(0); }
};

/// Applies one `key value` setting; '-' and '_' are interchangeable in keys.
void apply_setting(RunConfig& cfg, std::string key, const std::string& value);

/// Flat `key = value` file, '#' comments, then `flags` on top; the seed falls
/// back to EPISIGNAL_SEED when neither sets it.
RunConfig load_run_config(const std::optional<std::filesystem::path>& file,
                          const std::vector<std::pair<std::string, std::string>>& flags = {});

struct RunSummary {
  int exit_code = 0;
  std::string failed_stage;
  std::string message;
  int chosen_k = 0;
  int forecasted = 0;
  int skipped = 0;
  int errors = 0;
  std::vector<std::string> distinct_specs;
};

/// ingest -> prune/scale -> cluster -> audit -> per-cluster orders -> fit ->
/// holdout -> forecast, writing clusters/, audits/, models/, forecasts/ and
/// manifest.json under cfg.out.
RunSummary run_pipeline(const RunConfig& cfg);

/// File stem used for a county's per-county outputs.
std::string county_file_stem(const std::string& normalized);

}  // namespace episignal
