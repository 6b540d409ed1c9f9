#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "episignal/error.hpp"
#include "episignal/nelder_mead.hpp"

namespace episignal {

/// Orders of a SARIMA(p,d,q)(P,D,Q)[s] model.
struct SarimaSpec {
  int p = 0, d = 0, q = 0;
  int P = 0, D = 0, Q = 0;
  int s = 1;

  /// ARMA coefficients plus the noise variance.
  int n_params() const { return p + q + P + Q + 1; }
  int ar_span() const { return p + P * s; }
  int ma_span() const { return q + Q * s; }
  int diff_span() const { return d + D * s; }

  /// Throws InvalidArgument for negative orders or a missing seasonal period.
  void validate() const;
  std::string str() const;
  /// Grammar: `(p,d,q)(P,D,Q)[s]`. Throws ParseError.
  static SarimaSpec parse(std::string_view text);

  friend auto operator<=>(const SarimaSpec&, const SarimaSpec&) = default;
};

/// Coefficients in the sign convention
///   (1 - sum phi_i L^i)(1 - sum Phi_i L^{is}) w_t = (1 + sum theta_j L^j)(1 + sum Theta_j L^{js}) e_t.
struct SarimaParams {
  Eigen::VectorXd phi;
  Eigen::VectorXd theta;
  Eigen::VectorXd seasonal_phi;
  Eigen::VectorXd seasonal_theta;
  double sigma2 = 1.0;

  static SarimaParams zeros(const SarimaSpec& spec);
  /// [phi, theta, seasonal_phi, seasonal_theta]
  Eigen::VectorXd packed() const;
  static SarimaParams unpack(const SarimaSpec& spec, const Eigen::VectorXd& v, double sigma2 = 1.0);
};

// ---------------------------------------------------------------------------
// Lag-polynomial and series primitives.

/// Applies (1 - L)^d then (1 - L^s)^D. Output length is len - d - D*s. Throws TooShort.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> difference(const Eigen::MatrixBase<Derived>& y, int d, int D,
                                                                       int s) {
  using Vec = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;
  if (d < 0 || D < 0 || (D > 0 && s < 1)) throw Error(ErrorKind::InvalidArgument, "invalid differencing orders");
  if (y.size() <= static_cast<Eigen::Index>(d) + static_cast<Eigen::Index>(D) * s) {
    throw Error(ErrorKind::TooShort, "series of length " + std::to_string(y.size()) + " cannot be differenced d=" +
                                         std::to_string(d) + " D=" + std::to_string(D) + " s=" + std::to_string(s));
  }
  Vec w = y;
  for (int i = 0; i < d; ++i) {
    const Eigen::Index m = w.size() - 1;
    w = (w.tail(m) - w.head(m)).eval();
  }
  for (int i = 0; i < D; ++i) {
    const Eigen::Index m = w.size() - s;
    w = (w.tail(m) - w.head(m)).eval();
  }
  return w;
}

/// Sample autocorrelations r_0..r_max_lag (r_0 = 1). Throws TooShort / ZeroVariance.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> acf(const Eigen::MatrixBase<Derived>& y, int max_lag) {
  using Scalar = typename Derived::Scalar;
  if (max_lag < 0 || y.size() < max_lag + 2) {
    throw Error(ErrorKind::TooShort, "acf needs at least max_lag + 2 observations");
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c = y.derived().array() - y.mean();
  const Scalar denom = c.squaredNorm();
  if (!(denom > Scalar(0))) throw Error(ErrorKind::ZeroVariance, "acf of a constant series");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r(max_lag + 1);
  const Eigen::Index n = c.size();
  for (int k = 0; k <= max_lag; ++k) r(k) = c.head(n - k).dot(c.tail(n - k)) / denom;
  return r;
}

/// Partial autocorrelations at lags 1..max_lag (element 0 is lag 1), by the
/// Durbin-Levinson recursion on the sample acf. Throws NumericalBreakdown.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> pacf(const Eigen::MatrixBase<Derived>& y, int max_lag) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Vec r = acf(y, max_lag);
  Vec out(max_lag);
  Vec phi = Vec::Zero(max_lag + 1);
  Vec prev = Vec::Zero(max_lag + 1);
  Scalar v = r(0);
  for (int k = 1; k <= max_lag; ++k) {
    Scalar num = r(k);
    for (int j = 1; j < k; ++j) num -= prev(j) * r(k - j);
    if (!(v > Scalar(0))) throw Error(ErrorKind::NumericalBreakdown, "prediction variance vanished at lag " + std::to_string(k));
    const Scalar kk = num / v;
    phi(k) = kk;
    for (int j = 1; j < k; ++j) phi(j) = prev(j) - kk * prev(k - j);
    v *= Scalar(1) - kk * kk;
    out(k - 1) = kk;
    prev = phi;
  }
  return out;
}

/// Product of two lag polynomials given by coefficients c_0..c_n.
Eigen::VectorXd poly_mul(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
/// 1 - sum phi_i z^i
Eigen::VectorXd ar_poly(const Eigen::VectorXd& phi, int stride = 1);
/// 1 + sum theta_i z^i
Eigen::VectorXd ma_poly(const Eigen::VectorXd& theta, int stride = 1);
/// (1 - z)^d (1 - z^s)^D
Eigen::VectorXd diff_poly(int d, int D, int s);
/// Smallest modulus among the roots of c_0 + c_1 z + ... (infinity when constant).
double min_root_modulus(const Eigen::VectorXd& coeffs);

/// Partial-autocorrelation reparameterisation: maps partial autocorrelations
/// in (-1, 1) to the coefficients of a stationary 1 - sum phi_i z^i, and back.
Eigen::VectorXd pacf_to_ar(const Eigen::VectorXd& partial);
Eigen::VectorXd ar_to_pacf(const Eigen::VectorXd& phi);

/// Throws NonInvertibleParams unless all four polynomials have roots outside the unit circle.
void check_roots(const SarimaSpec& spec, const SarimaParams& params);
/// Smallest root modulus over the four polynomials.
double min_params_root_modulus(const SarimaSpec& spec, const SarimaParams& params);

// ---------------------------------------------------------------------------
// Likelihood, estimation and forecasting.

struct CssResult {
  /// Conditional residuals after differencing and conditioning.
  Eigen::VectorXd residuals;
  /// Differenced (and, without differencing, mean-centred) series.
  Eigen::VectorXd working;
  /// First residual index within `working`.
  Eigen::Index start = 0;
  double mean = 0.0;
  double sigma2 = 0.0;
  double loglik = 0.0;
};

/// Conditional-sum-of-squares Gaussian log-likelihood with sigma^2 profiled out.
/// Without differencing the series is centred by its mean first.
/// Residuals start after max(p + P*s, condition) working observations.
/// Throws NonInvertibleParams / TooShort.
double css_loglik(const SarimaSpec& spec, const SarimaParams& params, const Eigen::VectorXd& y, int condition = 0);
CssResult css_evaluate(const SarimaSpec& spec, const SarimaParams& params, const Eigen::VectorXd& y,
                       int condition = 0);

struct FittedSarima {
  SarimaSpec spec;
  SarimaParams params;
  /// Series mean removed before fitting; zero whenever d + D > 0.
  double mean = 0.0;
  double loglik = 0.0;
  double aic = 0.0;
  Eigen::VectorXd residuals;
  bool converged = false;
  /// Differenced series identically zero: only the noise model is fitted.
  bool degenerate = false;
  int iterations = 0;
  /// Log-likelihood at each multi-start's initial point.
  std::vector<double> start_logliks;
};

struct FitOptions {
  int starts = 5;
  /// Working observations conditioned on when larger than p + P*s. Models
  /// compared by AIC must share it so their likelihoods cover the same terms.
  int condition = 0;
  NelderMeadOptions optimizer{};
};

/// Maximises css_loglik by multi-start Nelder-Mead in the unconstrained
/// reparameterisation. Throws TooShort.
FittedSarima fit(const SarimaSpec& spec, const Eigen::VectorXd& y, std::uint64_t seed, const FitOptions& opt = {});

struct GridOptions {
  int p_max = 2, q_max = 2, P_max = 2, Q_max = 2;
  int d = 1, D = 1, s = 7;
  std::uint64_t seed = 0;
  FitOptions fit{};
  /// Worker threads for independent cells; results do not depend on it.
  int threads = 1;
};

struct GridFailure {
  SarimaSpec spec;
  std::string message;
};

struct GridResult {
  /// Ascending AIC; ties by fewer parameters, then spec order.
  std::vector<FittedSarima> ranked;
  std::vector<GridFailure> failures;
};

/// Every cell conditions on the largest p + P*s of the grid so AIC values are
/// comparable. Throws AllFitsFailed when no cell could be fitted.
GridResult grid_search(const Eigen::VectorXd& y, const GridOptions& opt);

struct Forecast {
  int horizon = 0;
  double level = 0.95;
  Eigen::VectorXd point;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd variance;
};

/// psi-weights psi_0..psi_{h-1} of the model including its differencing operators.
Eigen::VectorXd psi_weights(const SarimaSpec& spec, const SarimaParams& params, int h);

/// Recursive point forecasts with zero future shocks, Gaussian intervals from
/// the psi-weights. Throws HorizonZero.
Forecast forecast(const FittedSarima& f, const Eigen::VectorXd& y, int h, double level = 0.95);

/// Inverse standard normal CDF.
double normal_quantile(double p);

/// Unintegrated ARMA draw of length n after `burn_in` discarded steps.
Eigen::VectorXd simulate_core(const SarimaSpec& spec, const SarimaParams& params, int n, std::uint64_t seed,
                              int burn_in = 200);
/// Inverse of `difference` with zero initial conditions.
Eigen::VectorXd integrate(const Eigen::VectorXd& w, int d, int D, int s);
/// simulate_core followed by integration through d, D and s. Throws NonInvertibleParams.
Eigen::VectorXd simulate(const SarimaSpec& spec, const SarimaParams& params, int n, std::uint64_t seed, int burn_in = 200);

}  // namespace episignal
