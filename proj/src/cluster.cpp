#include "episignal/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "episignal/error.hpp"
#include "episignal/random.hpp"

namespace episignal {

namespace {

void check_input(const Eigen::MatrixXd& x, int k) {
  if (x.rows() == 0 || x.cols() == 0) throw Error(ErrorKind::EmptyMatrix, "k-means on an empty matrix");
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  if (k > x.rows()) {
    throw Error(ErrorKind::KTooLarge, "k = " + std::to_string(k) + " exceeds " + std::to_string(x.rows()) + " rows");
  }
}

// Greedy distance-weighted seeding: each new center is the best of a few
// D^2-weighted candidates by resulting potential.
Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
  Eigen::MatrixXd c(k, x.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);

  Eigen::Index first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  c.row(0) = x.row(first);
  chosen[static_cast<std::size_t>(first)] = true;
  Eigen::VectorXd d2 = (x.rowwise() - c.row(0)).rowwise().squaredNorm();

  for (int j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index pick = -1;
    if (total <= 0.0) {
      // every remaining point coincides with a center: take an unchosen row
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) free.push_back(i);
      pick = free[rng.below(free.size())];
    } else {
      double best_potential = std::numeric_limits<double>::infinity();
      for (int t = 0; t < trials; ++t) {
        double r = rng.uniform() * total;
        Eigen::Index cand = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
          r -= d2(i);
          if (r < 0.0 && d2(i) > 0.0) {
            cand = i;
            break;
          }
        }
        while (d2(cand) <= 0.0 && cand > 0) --cand;
        const double potential = d2.cwiseMin((x.rowwise() - x.row(cand)).rowwise().squaredNorm()).sum();
        if (potential < best_potential) {
          best_potential = potential;
          pick = cand;
        }
      }
    }
    c.row(j) = x.row(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
    d2 = d2.cwiseMin((x.rowwise() - c.row(j)).rowwise().squaredNorm());
  }
  return c;
}

// Means of assigned rows. Empty clusters take the point farthest from its own
// centroid among clusters that can spare one; `labels` is updated accordingly.
Eigen::MatrixXd update_centroids(const Eigen::MatrixXd& x, const Eigen::MatrixXd& old, std::vector<int>& labels) {
  const auto k = old.rows();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, x.cols());
  std::vector<Eigen::Index> count(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    c.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    ++count[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    if (count[static_cast<std::size_t>(j)] > 0) c.row(j) /= static_cast<double>(count[static_cast<std::size_t>(j)]);
  }

  for (Eigen::Index j = 0; j < k; ++j) {
    if (count[static_cast<std::size_t>(j)] > 0) continue;
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      if (count[static_cast<std::size_t>(l)] < 2) continue;
      const double d = (x.row(i) - c.row(l)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far < 0) {
      c.row(j) = old.row(j);
      continue;
    }
    const int from = labels[static_cast<std::size_t>(far)];
    const auto nf = static_cast<double>(count[static_cast<std::size_t>(from)]);
    c.row(from) = (c.row(from) * nf - x.row(far)) / (nf - 1.0);
    --count[static_cast<std::size_t>(from)];
    c.row(j) = x.row(far);
    count[static_cast<std::size_t>(j)] = 1;
    labels[static_cast<std::size_t>(far)] = static_cast<int>(j);
  }
  return c;
}

Eigen::MatrixXd exact_means(const Eigen::MatrixXd& x, const Eigen::MatrixXd& fallback, const std::vector<int>& labels) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(fallback.rows(), x.cols());
  Eigen::VectorXd count = Eigen::VectorXd::Zero(fallback.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    c.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    count(labels[static_cast<std::size_t>(i)]) += 1.0;
  }
  for (Eigen::Index j = 0; j < c.rows(); ++j) {
    if (count(j) > 0) c.row(j) /= count(j);
    else c.row(j) = fallback.row(j);
  }
  return c;
}

void canonicalize(KMeansFit& fit) {
  const auto k = fit.model.centroids.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  const auto& c = fit.model.centroids;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (c(a, j) != c(b, j)) return c(a, j) < c(b, j);
    }
    return false;
  });
  std::vector<int> remap(static_cast<std::size_t>(k));
  Eigen::MatrixXd sorted(k, c.cols());
  for (Eigen::Index r = 0; r < k; ++r) {
    sorted.row(r) = c.row(order[static_cast<std::size_t>(r)]);
    remap[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = static_cast<int>(r);
  }
  fit.model.centroids = std::move(sorted);
  for (auto& l : fit.assignment.labels) l = remap[static_cast<std::size_t>(l)];
}

}  // namespace

std::vector<int> Assignment::sizes() const {
  std::vector<int> out(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++out[static_cast<std::size_t>(l)];
  return out;
}

std::vector<int> assign_nearest(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids, const std::vector<int>* current) {
  std::vector<int> labels(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
      const double d = (x.row(i) - centroids.row(j)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    if (current) {
      const int cur = (*current)[static_cast<std::size_t>(i)];
      if ((x.row(i) - centroids.row(cur)).squaredNorm() <= best_d) best = cur;
    }
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

double inertia(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids, const std::vector<int>& labels) {
  double sse = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) sse += (x.row(i) - centroids.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return sse;
}

KMeansFit kmeans_refine(const Eigen::MatrixXd& x, Eigen::MatrixXd centroids, const KMeansOptions& opt) {
  check_input(x, static_cast<int>(centroids.rows()));
  KMeansFit fit;
  auto& model = fit.model;
  model.k = static_cast<int>(centroids.rows());

  std::vector<int> labels = assign_nearest(x, centroids);
  model.inertia_trace.push_back(inertia(x, centroids, labels));
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    Eigen::MatrixXd next = update_centroids(x, centroids, labels);
    const double shift = (next - centroids).rowwise().norm().maxCoeff();
    centroids = std::move(next);
    std::vector<int> relabeled = assign_nearest(x, centroids, &labels);
    model.inertia_trace.push_back(inertia(x, centroids, relabeled));
    const bool stable = relabeled == labels;
    labels = std::move(relabeled);
    if (stable || shift < opt.tol) {
      ++it;
      break;
    }
  }
  centroids = exact_means(x, centroids, labels);
  const double final_sse = inertia(x, centroids, labels);
  if (final_sse < model.inertia_trace.back()) model.inertia_trace.push_back(final_sse);

  model.centroids = std::move(centroids);
  model.inertia = final_sse;
  model.iterations = it;
  fit.assignment = {std::move(labels), model.k};
  canonicalize(fit);
  return fit;
}

KMeansFit kmeans_fit(const Eigen::MatrixXd& x, int k, std::uint64_t seed, const KMeansOptions& opt) {
  check_input(x, k);
  if (opt.restarts < 1) throw Error(ErrorKind::InvalidArgument, "restarts must be at least 1");
  KMeansFit best;
  bool have = false;
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    KMeansFit fit = kmeans_refine(x, seed_centroids(x, k, rng), opt);
    if (!have || fit.model.inertia < best.model.inertia) {
      best = std::move(fit);
      have = true;
    }
  }
  best.model.seed = seed;
  return best;
}

ElbowCurve elbow_scan(const Eigen::MatrixXd& x, int k_min, int k_max, std::uint64_t seed, const KMeansOptions& opt) {
  if (k_min < 1 || k_min >= k_max) {
    throw Error(ErrorKind::InvalidArgument, "elbow scan needs 1 <= k_min < k_max");
  }
  check_input(x, k_max);
  ElbowCurve curve;
  for (int k = k_min; k <= k_max; ++k) {
    KMeansFit fit = kmeans_fit(x, k, seed + static_cast<std::uint64_t>(k), opt);
    if (!curve.fits.empty()) {
      const KMeansFit& prev = curve.fits.back();
      Eigen::Index worst = 0;
      double worst_d = -1.0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double d = (x.row(i) - prev.model.centroids.row(prev.assignment.labels[static_cast<std::size_t>(i)])).squaredNorm();
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      Eigen::MatrixXd start(k, x.cols());
      start.topRows(k - 1) = prev.model.centroids;
      start.row(k - 1) = x.row(worst);
      KMeansFit warm = kmeans_refine(x, std::move(start), opt);
      if (warm.model.inertia < fit.model.inertia) {
        warm.model.seed = fit.model.seed;
        fit = std::move(warm);
      }
    }
    curve.k_values.push_back(k);
    curve.sse.push_back(fit.model.inertia);
    curve.fits.push_back(std::move(fit));
  }
  return curve;
}

int knee_detect(const ElbowCurve& c) {
  const std::size_t n = c.k_values.size();
  if (n < 3 || c.sse.size() != n) throw Error(ErrorKind::TooFewPoints, "knee detection needs at least 3 curve points");
  const double x1 = c.k_values.front(), y1 = c.sse.front();
  const double x2 = c.k_values.back(), y2 = c.sse.back();
  const double len = std::hypot(x2 - x1, y2 - y1);
  const double tie = 1e-12 * (len > 0.0 ? len : 1.0);
  int best_k = c.k_values[1];
  double best = -1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double xi = c.k_values[i], yi = c.sse[i];
    const double d = len > 0.0 ? std::abs((x2 - x1) * (y1 - yi) - (x1 - xi) * (y2 - y1)) / len : 0.0;
    if (d > best + tie) {
      best = d;
      best_k = c.k_values[i];
    }
  }
  return best_k;
}

double silhouette(const Eigen::MatrixXd& x, const Assignment& a) {
  const auto n = x.rows();
  if (static_cast<Eigen::Index>(a.labels.size()) != n) throw Error(ErrorKind::InvalidArgument, "assignment length mismatch");
  int k = a.k;
  for (int l : a.labels) k = std::max(k, l + 1);
  std::vector<int> size(static_cast<std::size_t>(k), 0);
  for (int l : a.labels) ++size[static_cast<std::size_t>(l)];
  const auto populated = std::count_if(size.begin(), size.end(), [](int s) { return s > 0; });
  if (populated < 2) throw Error(ErrorKind::SingleCluster, "silhouette needs at least two populated clusters");

  double total = 0.0;
  std::vector<double> sum(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = a.labels[static_cast<std::size_t>(i)];
    if (size[static_cast<std::size_t>(own)] == 1) continue;
    std::fill(sum.begin(), sum.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) sum[static_cast<std::size_t>(a.labels[static_cast<std::size_t>(j)])] += (x.row(i) - x.row(j)).norm();
    }
    const double ai = sum[static_cast<std::size_t>(own)] / (size[static_cast<std::size_t>(own)] - 1);
    double bi = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own || size[static_cast<std::size_t>(c)] == 0) continue;
      bi = std::min(bi, sum[static_cast<std::size_t>(c)] / size[static_cast<std::size_t>(c)]);
    }
    const double denom = std::max(ai, bi);
    if (denom > 0.0) total += (bi - ai) / denom;
  }
  return total / static_cast<double>(n);
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "label vectors differ in length");
  const auto n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  auto c2 = [](double m) { return m * (m - 1.0) / 2.0; };
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [_, m] : joint) index += c2(m);
  for (const auto& [_, m] : ra) sa += c2(m);
  for (const auto& [_, m] : rb) sb += c2(m);
  const double expected = sa * sb / c2(n);
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return index == max_index ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

std::vector<ClusterRecord> cluster_summary(const FeatureMatrix& profiles, const std::map<std::string, CaseSeries>& cases,
                                           const Assignment& a) {
  if (static_cast<Eigen::Index>(a.labels.size()) != profiles.rows()) {
    throw Error(ErrorKind::InvalidArgument, "assignment is not aligned with the profile rows");
  }
  std::vector<ClusterRecord> out(static_cast<std::size_t>(a.k));
  std::vector<int> with_series(static_cast<std::size_t>(a.k), 0);
  std::vector<double> cases_sum(static_cast<std::size_t>(a.k), 0.0), deaths_sum(static_cast<std::size_t>(a.k), 0.0);
  for (int c = 0; c < a.k; ++c) {
    out[static_cast<std::size_t>(c)].cluster = c;
    out[static_cast<std::size_t>(c)].feature_means = Eigen::VectorXd::Zero(profiles.cols());
  }
  for (Eigen::Index i = 0; i < profiles.rows(); ++i) {
    const auto c = static_cast<std::size_t>(a.labels[static_cast<std::size_t>(i)]);
    auto& rec = out[c];
    const auto& key = profiles.county_keys[static_cast<std::size_t>(i)].normalized;
    rec.counties.push_back(key);
    rec.feature_means += profiles.values.row(i).transpose();
    if (auto it = cases.find(key); it != cases.end()) {
      ++with_series[c];
      cases_sum[c] += static_cast<double>(it->second.total_cases());
      deaths_sum[c] += static_cast<double>(it->second.total_deaths());
    } else {
      rec.missing_series.push_back(key);
    }
  }
  for (std::size_t c = 0; c < out.size(); ++c) {
    auto& rec = out[c];
    if (rec.counties.empty()) {
      rec.feature_means.setConstant(std::numeric_limits<double>::quiet_NaN());
    } else {
      rec.feature_means /= static_cast<double>(rec.counties.size());
    }
    if (with_series[c] > 0) {
      rec.mean_cases = cases_sum[c] / with_series[c];
      rec.mean_deaths = deaths_sum[c] / with_series[c];
    }
  }
  return out;
}

}  // namespace episignal
