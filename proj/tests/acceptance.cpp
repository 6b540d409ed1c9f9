// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "episignal/benford.hpp"
#include "episignal/cluster.hpp"
#include "episignal/pipeline.hpp"
#include "episignal/random.hpp"
#include "episignal/sarima.hpp"
#include "support/fixtures.hpp"

#ifndef EPISIGNAL_GOLDEN_DIR
#error "EPISIGNAL_GOLDEN_DIR must point at tests/golden"
#endif

using namespace episignal;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Fits collected by criterion 6, re-examined by criterion 12.
struct FitCase {
  SarimaSpec spec;
  Eigen::VectorXd y;
  FittedSarima fit;
};
std::vector<FitCase> g_fits;

// ---------------------------------------------------------------------------

Outcome c1_benford_pmf() {
  const double listed[9] = {30.103, 17.609, 12.494, 9.691, 7.918, 6.695, 5.799, 5.115, 4.576};
  const double tol = 5e-4;
  const auto t0 = Clock::now();
  const auto pmf = benford_pmf();
  const double elapsed = seconds_since(t0);
  double worst = 0.0, sum = 0.0;
  for (int d = 0; d < 9; ++d) {
    worst = std::max(worst, std::abs(pmf[d] - listed[d] / 100.0));
    sum += pmf[d];
  }
  const bool ok = worst <= tol && std::abs(sum - 1.0) <= 1e-12 && elapsed < 1e-3;
  return {ok, fmt("max |p - listed| = %.2e, |sum - 1| = %.2e, %.3f ms", worst, std::abs(sum - 1.0), elapsed * 1e3)};
}

Outcome c2_exponential_conforms() {
  const auto t0 = Clock::now();
  std::vector<double> c(120);
  for (int t = 0; t < 120; ++t) c[t] = 100.0 * std::pow(1.10, t);
  const BenfordReport r = benford_report(c, make_period(parse_date("2020-01-01"), parse_date("2020-04-29")));
  const double elapsed = seconds_since(t0);
  const bool mad_ok = r.mad.band == MadBand::close || r.mad.band == MadBand::acceptable;
  const bool ok = r.chi2.statistic < 15.507 && r.ks.statistic < 1.36 / std::sqrt(120.0) && mad_ok && elapsed < 10e-3;
  return {ok, fmt("chi2 %.4f, KS %.4f (crit %.4f), MAD %.4f (%s), %.3f ms", r.chi2.statistic, r.ks.statistic,
                  1.36 / std::sqrt(120.0), r.mad.value, std::string(to_string(r.mad.band)).c_str(), elapsed * 1e3)};
}

Outcome c3_uniform_rejected() {
  const auto t0 = Clock::now();
  int rejected = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(300 + static_cast<std::uint64_t>(trial));
    std::vector<double> v(1000);
    for (double& x : v) x = 1.0 + 8.999 * rng.uniform();
    const DigitHistogram h = digit_histogram(v).histogram;
    if (!chi_square(h).pass) ++rejected;
  }
  const double elapsed = seconds_since(t0);
  return {rejected >= 99 && elapsed < 1.0, fmt("%d/100 rejected, %.3f s", rejected, elapsed)};
}

Outcome c4_mantissa() {
  Rng rng(4);
  std::vector<double> v(100000);
  for (double& x : v) x = std::pow(10.0, rng.uniform()) * std::pow(10.0, static_cast<double>(rng.below(6)));
  const double mean = mantissa_stats(v).mean;
  std::vector<double> powers;
  for (int e = -5; e <= 15; ++e) powers.push_back(std::pow(10.0, e));
  const double pmean = mantissa_stats(powers).mean;
  return {std::abs(mean - 0.5) <= 0.01 && pmean == 0.0, fmt("Benford mean %.5f, powers of ten %.17g", mean, pmean)};
}

Outcome c5_kmeans_recovery() {
  const auto t0 = Clock::now();
  Eigen::MatrixXd centers(3, 2);
  centers << 0.0, 0.0, 1.0, 0.0, 0.5, 0.8660254037844386;
  const double separation = 1.0;
  int ari_ok = 0, monotone_ok = 0, knee_ok = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const auto blobs = testing::gaussian_blobs(centers, 30, 0.01 * separation, 500 + static_cast<std::uint64_t>(seed));
    const KMeansFit f = kmeans_fit(blobs.x, 3, static_cast<std::uint64_t>(seed));
    if (adjusted_rand_index(f.assignment.labels, blobs.labels) == 1.0) ++ari_ok;
    const ElbowCurve curve = elbow_scan(blobs.x, 1, 10, static_cast<std::uint64_t>(seed));
    bool monotone = std::is_sorted(f.model.inertia_trace.rbegin(), f.model.inertia_trace.rend());
    for (const auto& fit : curve.fits) {
      monotone = monotone && std::is_sorted(fit.model.inertia_trace.rbegin(), fit.model.inertia_trace.rend());
    }
    if (monotone) ++monotone_ok;
    if (knee_detect(curve) == 3) ++knee_ok;
  }
  const double elapsed = seconds_since(t0);
  return {ari_ok == 20 && monotone_ok == 20 && knee_ok >= 18 && elapsed < 1.0,
          fmt("ARI=1 on %d/20, monotone inertia on %d/20, knee k=3 on %d/20, %.3f s", ari_ok, monotone_ok, knee_ok,
              elapsed)};
}

Outcome c6_parameter_recovery() {
  const auto t0 = Clock::now();
  const SarimaSpec ar{1, 0, 0, 0, 0, 0, 1};
  const SarimaSpec ma{0, 0, 1, 0, 0, 0, 1};
  const SarimaSpec airline{0, 1, 1, 0, 1, 1, 7};
  SarimaParams ar_true = SarimaParams::zeros(ar);
  ar_true.phi(0) = 0.7;
  SarimaParams ma_true = SarimaParams::zeros(ma);
  ma_true.theta(0) = 0.5;
  SarimaParams air_true = SarimaParams::zeros(airline);
  air_true.theta(0) = 0.4;
  air_true.seasonal_theta(0) = 0.3;

  int ar_ok = 0, ma_ok = 0, air_ok = 0;
  g_fits.clear();
  for (int r = 0; r < 100; ++r) {
    const auto seed = 6000 + static_cast<std::uint64_t>(r);
    {
      const Eigen::VectorXd y = simulate(ar, ar_true, 500, seed);
      FittedSarima f = fit(ar, y, seed);
      if (std::abs(f.params.phi(0) - 0.7) <= 0.1) ++ar_ok;
      g_fits.push_back({ar, y, std::move(f)});
    }
    {
      const Eigen::VectorXd y = simulate(ma, ma_true, 500, seed);
      FittedSarima f = fit(ma, y, seed);
      if (std::abs(f.params.theta(0) - 0.5) <= 0.12) ++ma_ok;
      g_fits.push_back({ma, y, std::move(f)});
    }
    {
      const Eigen::VectorXd y = simulate(airline, air_true, 350, seed);
      FittedSarima f = fit(airline, y, seed);
      if (std::abs(f.params.theta(0) - 0.4) <= 0.15 && std::abs(f.params.seasonal_theta(0) - 0.3) <= 0.15) ++air_ok;
      g_fits.push_back({airline, y, std::move(f)});
    }
  }
  const double elapsed = seconds_since(t0);
  return {ar_ok >= 95 && ma_ok >= 90 && air_ok >= 90 && elapsed < 120.0,
          fmt("AR(1) %d/100, MA(1) %d/100, airline %d/100, %.1f s", ar_ok, ma_ok, air_ok, elapsed)};
}

Outcome c7_aic_selection() {
  const auto t0 = Clock::now();
  const SarimaSpec airline{0, 1, 1, 0, 1, 1, 7};
  SarimaParams truth = SarimaParams::zeros(airline);
  truth.theta(0) = 0.4;
  truth.seasonal_theta(0) = 0.3;
  GridOptions g;
  g.p_max = g.q_max = g.P_max = g.Q_max = 1;
  g.d = g.D = 1;
  g.s = 7;
  int first = 0, top3 = 0;
  for (int r = 0; r < 100; ++r) {
    const auto seed = 7000 + static_cast<std::uint64_t>(r);
    const Eigen::VectorXd y = simulate(airline, truth, 350, seed);
    g.seed = seed;
    const GridResult res = grid_search(y, g);
    for (std::size_t i = 0; i < std::min<std::size_t>(3, res.ranked.size()); ++i) {
      if (res.ranked[i].spec == airline) {
        if (i == 0) ++first;
        ++top3;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  return {first >= 60 && top3 >= 90 && elapsed < 300.0,
          fmt("true spec first %d/100, top-3 %d/100, %.1f s", first, top3, elapsed)};
}

Outcome c8_forecast_closed_forms() {
  const double tol = 1e-9;
  Rng rng(8);
  Eigen::VectorXd walk(200), noise(200);
  double level = 50.0;
  for (int t = 0; t < 200; ++t) {
    level += rng.normal();
    walk(t) = level;
    noise(t) = 3.0 + rng.normal();
  }
  const int h = 12;
  const FittedSarima rw = fit({0, 1, 0, 0, 0, 0, 1}, walk, 8);
  const Forecast frw = forecast(rw, walk, h);
  double rw_err = 0.0;
  for (int i = 0; i < h; ++i) {
    rw_err = std::max(rw_err, std::abs(frw.point(i) - walk(199)));
    rw_err = std::max(rw_err, std::abs(frw.variance(i) - (i + 1) * rw.params.sigma2));
  }
  const FittedSarima wn = fit({0, 0, 0, 0, 0, 0, 1}, noise, 8);
  const Forecast fwn = forecast(wn, noise, h);
  double wn_err = 0.0;
  for (int i = 0; i < h; ++i) {
    wn_err = std::max(wn_err, std::abs(fwn.point(i) - noise.mean()));
    wn_err = std::max(wn_err, std::abs(fwn.variance(i) - wn.params.sigma2));
  }
  return {rw_err <= tol && wn_err <= tol, fmt("random walk max error %.2e, white noise max error %.2e", rw_err, wn_err)};
}

Outcome c9_holdout_quality() {
  const Eigen::VectorXd y = testing::trend_season_series(140, 0.05, 9);
  const SarimaSpec spec{1, 1, 1, 0, 1, 1, 7};
  const FittedSarima f = fit(spec, y, 9);
  const HoldoutMetrics m = holdout_evaluate(f, y, 14, 9);
  return {m.mape < 5.0, fmt("14-day holdout MAPE %.4f %%", m.mape)};
}

Outcome c10_param_table() {
  const std::string golden = testing::slurp(fs::path(EPISIGNAL_GOLDEN_DIR) / "param_table.txt");
  const std::string produced = default_param_table().str();
  return {!golden.empty() && golden == produced, golden == produced ? "nine rows identical" : "mismatch:\n" + produced};
}

Outcome c11_determinism() {
  const auto t0 = Clock::now();
  const fs::path dir = testing::scratch_dir("acceptance-determinism");
  const auto fx = testing::write_county_fixture(dir / "data", 11);
  RunConfig cfg;
  cfg.profiles = {fx.profiles};
  cfg.cases = fx.cases;
  cfg.seed = 11;
  cfg.periods = parse_periods("2020-03-01..2020-05-15,2020-05-16..2020-07-28");
  cfg.min_total = 5000;
  cfg.out = dir / "run1";
  const RunSummary a = run_pipeline(cfg);
  cfg.out = dir / "run2";
  const RunSummary b = run_pipeline(cfg);

  int compared = 0, differing = 0;
  auto compare = [&](const fs::path& rel) {
    ++compared;
    const std::string x = testing::slurp(dir / "run1" / rel);
    if (x.empty() || x != testing::slurp(dir / "run2" / rel)) ++differing;
  };
  compare("manifest.json");
  compare("report.json");
  compare("clusters/assignments.csv");
  for (const char* sub : {"forecasts", "audits", "models"}) {
    for (const auto& e : fs::directory_iterator(dir / "run1" / sub)) compare(fs::path(sub) / e.path().filename());
  }
  int forecast_files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "run1" / "forecasts")) ++forecast_files;
  const double elapsed = seconds_since(t0);
  const bool ok = a.exit_code == 0 && b.exit_code == 0 && differing == 0 && forecast_files == 30 && elapsed < 180.0;
  return {ok, fmt("%d files compared, %d differ, %d forecasts, %.1f s", compared, differing, forecast_files, elapsed)};
}

Outcome c12_first_order_optimality() {
  if (g_fits.empty()) return {false, "criterion 6 produced no fits"};
  int bad = 0;
  double worst_ratio = 0.0;
  const double h = 1e-5;
  for (const auto& c : g_fits) {
    const Eigen::VectorXd x = c.fit.params.packed();
    const double bound = 1e-3 * (1.0 + std::abs(c.fit.loglik));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Eigen::VectorXd up = x, down = x;
      up(i) += h;
      down(i) -= h;
      const double g = (css_loglik(c.spec, SarimaParams::unpack(c.spec, up), c.y) -
                        css_loglik(c.spec, SarimaParams::unpack(c.spec, down), c.y)) /
                       (2.0 * h);
      worst_ratio = std::max(worst_ratio, std::abs(g) / bound);
      if (!(std::abs(g) < bound)) ++bad;
    }
  }
  return {bad == 0, fmt("%zu optima, %d partials over bound, worst |grad|/bound %.3e", g_fits.size(), bad, worst_ratio)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"benford pmf matches listed percentages", c1_benford_pmf},
      {"exponential growth conforms", c2_exponential_conforms},
      {"uniform leading digits rejected", c3_uniform_rejected},
      {"mantissa oracle", c4_mantissa},
      {"k-means recovers planted blobs", c5_kmeans_recovery},
      {"sarima parameter recovery", c6_parameter_recovery},
      {"aic selects the true spec", c7_aic_selection},
      {"forecast closed forms", c8_forecast_closed_forms},
      {"holdout forecast quality", c9_holdout_quality},
      {"param table fidelity", c10_param_table},
      {"end-to-end determinism", c11_determinism},
      {"first-order optimality", c12_first_order_optimality},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %2zu: %s -- %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
