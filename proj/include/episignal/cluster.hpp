#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "episignal/dataset.hpp"

namespace episignal {

struct KMeansOptions {
  int max_iter = 300;
  double tol = 1e-6;
  int restarts = 10;
};

struct KMeansModel {
  int k = 0;
  /// k x m; rows ordered lexicographically so labels do not depend on row order.
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  /// Inertia after every assignment step of the winning run.
  std::vector<double> inertia_trace;
};

struct Assignment {
  std::vector<int> labels;
  int k = 0;
  std::vector<int> sizes() const;
};

struct KMeansFit {
  KMeansModel model;
  Assignment assignment;
};

/// Lloyd iterations with distance-weighted seeding; best of `restarts` runs by
/// inertia. Deterministic in `seed`. Throws KTooLarge / EmptyMatrix.
KMeansFit kmeans_fit(const Eigen::MatrixXd& x, int k, std::uint64_t seed, const KMeansOptions& opt = {});
inline KMeansFit kmeans_fit(const FeatureMatrix& m, int k, std::uint64_t seed, const KMeansOptions& opt = {}) {
  return kmeans_fit(m.values, k, seed, opt);
}

/// Lloyd iterations from the given starting centroids (no restarts).
KMeansFit kmeans_refine(const Eigen::MatrixXd& x, Eigen::MatrixXd centroids, const KMeansOptions& opt = {});

/// Nearest centroid for every row; ties keep `current` when given, else the lowest index.
std::vector<int> assign_nearest(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids,
                                const std::vector<int>* current = nullptr);
double inertia(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids, const std::vector<int>& labels);

struct ElbowCurve {
  std::vector<int> k_values;
  std::vector<double> sse;
  std::vector<KMeansFit> fits;
};

/// One fit per k in [k_min, k_max]. Each k also tries a warm start from the
/// previous k's centroids plus its worst-fitted point, so sse never increases in k.
ElbowCurve elbow_scan(const Eigen::MatrixXd& x, int k_min, int k_max, std::uint64_t seed,
                      const KMeansOptions& opt = {});

/// k at the largest perpendicular distance from the chord joining the curve's
/// end points; interior points only, ties toward smaller k. Throws TooFewPoints.
int knee_detect(const ElbowCurve& c);

/// Mean silhouette with Euclidean distance; singleton clusters score 0.
/// Throws SingleCluster when fewer than two clusters are populated.
double silhouette(const Eigen::MatrixXd& x, const Assignment& a);

/// Chance-corrected agreement of two labelings (1 means identical up to relabeling).
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

struct ClusterRecord {
  int cluster = 0;
  std::vector<std::string> counties;
  /// Means of the unscaled features, aligned with the profile's feature names.
  Eigen::VectorXd feature_means;
  std::optional<double> mean_cases;
  std::optional<double> mean_deaths;
  std::vector<std::string> missing_series;
};

std::vector<ClusterRecord> cluster_summary(const FeatureMatrix& profiles, const std::map<std::string, CaseSeries>& cases,
                                           const Assignment& a);

}  // namespace episignal
