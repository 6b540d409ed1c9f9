#include "episignal/sarima.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <optional>
#include <regex>
#include <thread>

#include "episignal/random.hpp"

namespace episignal {

namespace {

// Partial autocorrelations are confined to (-kPacfBound, kPacfBound).
constexpr double kPacfBound = 1.0 - 1e-6;
// Returned fits keep every root at least this far outside the unit circle.
constexpr double kRootMargin = 1.0 + 1e-7;

struct Lag {
  int lag;
  double weight;
};

// Nonzero terms c_i (i >= 1) of a lag polynomial, with the sign flipped when
// `negate` so that AR terms read w_t = sum a_i w_{t-i} + ...
std::vector<Lag> lag_terms(const Eigen::VectorXd& poly, bool negate) {
  std::vector<Lag> out;
  for (Eigen::Index i = 1; i < poly.size(); ++i) {
    if (poly(i) != 0.0) out.push_back({static_cast<int>(i), negate ? -poly(i) : poly(i)});
  }
  return out;
}

struct Polys {
  Eigen::VectorXd ar;  // phi(z) Phi(z^s)
  Eigen::VectorXd ma;  // theta(z) Theta(z^s)
};

Polys model_polys(const SarimaSpec& spec, const SarimaParams& params) {
  return {poly_mul(ar_poly(params.phi), ar_poly(params.seasonal_phi, spec.s)),
          poly_mul(ma_poly(params.theta), ma_poly(params.seasonal_theta, spec.s))};
}

// Sum of squared conditional residuals of `w` from index `start`; residuals
// are written to `resid` (same length as w, zeros before start) when given.
double css_sse(const std::vector<Lag>& ar, const std::vector<Lag>& ma, const Eigen::VectorXd& w, Eigen::Index start,
               Eigen::VectorXd& resid) {
  const Eigen::Index n = w.size();
  resid.setZero(n);
  double sse = 0.0;
  for (Eigen::Index t = start; t < n; ++t) {
    double e = w(t);
    for (const auto& term : ar) e -= term.weight * w(t - term.lag);
    for (const auto& term : ma) {
      if (t - term.lag >= 0) e -= term.weight * resid(t - term.lag);
    }
    resid(t) = e;
    sse += e * e;
  }
  return sse;
}

double profiled_loglik(double sse, Eigen::Index n_eff) {
  const auto n = static_cast<double>(n_eff);
  const double sigma2 = sse / n;
  if (sigma2 <= 0.0) return std::numeric_limits<double>::infinity();
  return -0.5 * n * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
}

struct Working {
  Eigen::VectorXd w;
  double mean = 0.0;
};

Working working_series(const SarimaSpec& spec, const Eigen::VectorXd& y) {
  Working out;
  out.w = difference(y, spec.d, spec.D, spec.s);
  if (spec.d == 0 && spec.D == 0) {
    out.mean = y.mean();
    out.w.array() -= out.mean;
  }
  return out;
}

SarimaParams params_from_unconstrained(const SarimaSpec& spec, const Eigen::VectorXd& u) {
  SarimaParams out = SarimaParams::zeros(spec);
  Eigen::Index at = 0;
  auto block = [&](int len, bool ma) {
    Eigen::VectorXd partial = (u.segment(at, len).array().tanh() * kPacfBound).matrix();
    at += len;
    Eigen::VectorXd c = pacf_to_ar(partial);
    return ma ? Eigen::VectorXd(-c) : c;
  };
  out.phi = block(spec.p, false);
  out.theta = block(spec.q, true);
  out.seasonal_phi = block(spec.P, false);
  out.seasonal_theta = block(spec.Q, true);
  return out;
}

// Pulls any root inside the margin out to it by rescaling the polynomial's variable.
void enforce_margin(Eigen::VectorXd& coeffs, bool ma) {
  if (coeffs.size() == 0) return;
  const Eigen::VectorXd poly = ma ? ma_poly(coeffs) : ar_poly(coeffs);
  const double m = min_root_modulus(poly);
  if (m >= kRootMargin) return;
  const double rho = m / kRootMargin;
  double scale = 1.0;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    scale *= rho;
    coeffs(i) *= scale;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void SarimaSpec::validate() const {
  if (p < 0 || d < 0 || q < 0 || P < 0 || D < 0 || Q < 0) throw Error(ErrorKind::InvalidArgument, "negative order in " + str());
  if (s < 1) throw Error(ErrorKind::InvalidArgument, "seasonal period must be at least 1 in " + str());
  if (P + D + Q > 0 && s < 2) throw Error(ErrorKind::InvalidArgument, "seasonal terms need s >= 2 in " + str());
}

std::string SarimaSpec::str() const {
  return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")(" + std::to_string(P) + "," +
         std::to_string(D) + "," + std::to_string(Q) + ")[" + std::to_string(s) + "]";
}

SarimaSpec SarimaSpec::parse(std::string_view text) {
  static const std::regex grammar(R"(\((\d+),(\d+),(\d+)\)\((\d+),(\d+),(\d+)\)\[(\d+)\])");
  std::cmatch m;
  if (!std::regex_match(text.begin(), text.end(), m, grammar)) {
    throw Error(ErrorKind::ParseError, "spec '" + std::string(text) + "' does not match (p,d,q)(P,D,Q)[s]");
  }
  auto num = [&](int i) {
    const std::string digits = m[i].str();
    if (digits.size() > 4) throw Error(ErrorKind::ParseError, "order too large in '" + std::string(text) + "'");
    return std::stoi(digits);
  };
  SarimaSpec spec{num(1), num(2), num(3), num(4), num(5), num(6), num(7)};
  spec.validate();
  return spec;
}

SarimaParams SarimaParams::zeros(const SarimaSpec& spec) {
  SarimaParams out;
  out.phi = Eigen::VectorXd::Zero(spec.p);
  out.theta = Eigen::VectorXd::Zero(spec.q);
  out.seasonal_phi = Eigen::VectorXd::Zero(spec.P);
  out.seasonal_theta = Eigen::VectorXd::Zero(spec.Q);
  return out;
}

Eigen::VectorXd SarimaParams::packed() const {
  Eigen::VectorXd v(phi.size() + theta.size() + seasonal_phi.size() + seasonal_theta.size());
  v << phi, theta, seasonal_phi, seasonal_theta;
  return v;
}

SarimaParams SarimaParams::unpack(const SarimaSpec& spec, const Eigen::VectorXd& v, double sigma2) {
  if (v.size() != spec.p + spec.q + spec.P + spec.Q) throw Error(ErrorKind::InvalidArgument, "parameter vector length mismatch");
  SarimaParams out;
  out.phi = v.segment(0, spec.p);
  out.theta = v.segment(spec.p, spec.q);
  out.seasonal_phi = v.segment(spec.p + spec.q, spec.P);
  out.seasonal_theta = v.segment(spec.p + spec.q + spec.P, spec.Q);
  out.sigma2 = sigma2;
  return out;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd poly_mul(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.size() + b.size() - 1);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) == 0.0) continue;
    for (Eigen::Index j = 0; j < b.size(); ++j) out(i + j) += a(i) * b(j);
  }
  return out;
}

Eigen::VectorXd ar_poly(const Eigen::VectorXd& phi, int stride) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(phi.size() * stride + 1);
  c(0) = 1.0;
  for (Eigen::Index i = 0; i < phi.size(); ++i) c((i + 1) * stride) = -phi(i);
  return c;
}

Eigen::VectorXd ma_poly(const Eigen::VectorXd& theta, int stride) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(theta.size() * stride + 1);
  c(0) = 1.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) c((i + 1) * stride) = theta(i);
  return c;
}

Eigen::VectorXd diff_poly(int d, int D, int s) {
  Eigen::VectorXd c = Eigen::VectorXd::Ones(1);
  const Eigen::VectorXd first = Eigen::Vector2d(1.0, -1.0);
  for (int i = 0; i < d; ++i) c = poly_mul(c, first);
  if (D > 0) {
    Eigen::VectorXd seasonal = Eigen::VectorXd::Zero(s + 1);
    seasonal(0) = 1.0;
    seasonal(s) = -1.0;
    for (int i = 0; i < D; ++i) c = poly_mul(c, seasonal);
  }
  return c;
}

double min_root_modulus(const Eigen::VectorXd& coeffs) {
  // Roots of c(z) are reciprocals of the eigenvalues of the companion matrix of
  // the reversed polynomial z^p + (c_1/c_0) z^{p-1} + ... + c_p/c_0.
  Eigen::Index p = coeffs.size() - 1;
  while (p > 0 && coeffs(p) == 0.0) --p;
  if (p <= 0) return std::numeric_limits<double>::infinity();
  if (coeffs(0) == 0.0) return 0.0;
  if (p == 1) return std::abs(coeffs(0) / coeffs(1));
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) companion(0, j) = -coeffs(j + 1) / coeffs(0);
  for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();
  const double largest = eig.cwiseAbs().maxCoeff();
  return largest > 0.0 ? 1.0 / largest : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd pacf_to_ar(const Eigen::VectorXd& partial) {
  const Eigen::Index p = partial.size();
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd prev = phi;
  for (Eigen::Index k = 0; k < p; ++k) {
    const double r = partial(k);
    phi(k) = r;
    for (Eigen::Index j = 0; j < k; ++j) phi(j) = prev(j) - r * prev(k - 1 - j);
    prev = phi;
  }
  return phi;
}

Eigen::VectorXd ar_to_pacf(const Eigen::VectorXd& phi) {
  const Eigen::Index p = phi.size();
  Eigen::VectorXd cur = phi;
  Eigen::VectorXd partial(p);
  for (Eigen::Index k = p - 1; k >= 0; --k) {
    const double r = cur(k);
    partial(k) = r;
    if (std::abs(r) >= 1.0) throw Error(ErrorKind::NonInvertibleParams, "coefficients outside the stationary region");
    Eigen::VectorXd next(k);
    for (Eigen::Index j = 0; j < k; ++j) next(j) = (cur(j) + r * cur(k - 1 - j)) / (1.0 - r * r);
    cur = next;
  }
  return partial;
}

double min_params_root_modulus(const SarimaSpec& spec, const SarimaParams& params) {
  (void)spec;
  return std::min({min_root_modulus(ar_poly(params.phi)), min_root_modulus(ar_poly(params.seasonal_phi)),
                   min_root_modulus(ma_poly(params.theta)), min_root_modulus(ma_poly(params.seasonal_theta))});
}

void check_roots(const SarimaSpec& spec, const SarimaParams& params) {
  if (params.phi.size() != spec.p || params.theta.size() != spec.q || params.seasonal_phi.size() != spec.P ||
      params.seasonal_theta.size() != spec.Q) {
    throw Error(ErrorKind::InvalidArgument, "parameter sizes do not match " + spec.str());
  }
  if (!params.packed().allFinite()) throw Error(ErrorKind::NonInvertibleParams, "non-finite coefficients");
  auto guard = [](const Eigen::VectorXd& poly, const char* what) {
    const double m = min_root_modulus(poly);
    if (!(m > 1.0)) {
      throw Error(ErrorKind::NonInvertibleParams, std::string(what) + " polynomial has a root of modulus " + std::to_string(m));
    }
  };
  guard(ar_poly(params.phi), "AR");
  guard(ar_poly(params.seasonal_phi), "seasonal AR");
  guard(ma_poly(params.theta), "MA");
  guard(ma_poly(params.seasonal_theta), "seasonal MA");
}

// ---------------------------------------------------------------------------

CssResult css_evaluate(const SarimaSpec& spec, const SarimaParams& params, const Eigen::VectorXd& y, int condition) {
  spec.validate();
  check_roots(spec, params);
  Working work = working_series(spec, y);
  const Eigen::Index start = std::max(spec.ar_span(), condition);
  const Eigen::Index n_eff = work.w.size() - start;
  if (n_eff < 1) throw Error(ErrorKind::TooShort, "no observations left after conditioning for " + spec.str());

  const Polys polys = model_polys(spec, params);
  Eigen::VectorXd resid;
  const double sse = css_sse(lag_terms(polys.ar, true), lag_terms(polys.ma, false), work.w, start, resid);

  CssResult out;
  out.residuals = resid.tail(n_eff);
  out.working = std::move(work.w);
  out.start = start;
  out.mean = work.mean;
  out.sigma2 = sse / static_cast<double>(n_eff);
  out.loglik = profiled_loglik(sse, n_eff);
  return out;
}

double css_loglik(const SarimaSpec& spec, const SarimaParams& params, const Eigen::VectorXd& y, int condition) {
  return css_evaluate(spec, params, y, condition).loglik;
}

FittedSarima fit(const SarimaSpec& spec, const Eigen::VectorXd& y, std::uint64_t seed, const FitOptions& opt) {
  spec.validate();
  if (!y.allFinite()) throw Error(ErrorKind::InvalidArgument, "series contains non-finite values");
  Working work = working_series(spec, y);
  const Eigen::Index start = std::max(spec.ar_span(), opt.condition);
  const Eigen::Index n_eff = work.w.size() - start;
  if (n_eff < spec.n_params() + 1) {
    throw Error(ErrorKind::TooShort, "series of length " + std::to_string(y.size()) + " is too short for " + spec.str());
  }

  FittedSarima out;
  out.spec = spec;
  out.mean = work.mean;
  const int k = spec.p + spec.q + spec.P + spec.Q;

  if (work.w.squaredNorm() == 0.0) {
    out.params = SarimaParams::zeros(spec);
    out.params.sigma2 = 0.0;
    out.degenerate = true;
    out.converged = true;
    out.loglik = std::numeric_limits<double>::infinity();
    out.aic = -std::numeric_limits<double>::infinity();
    out.residuals = Eigen::VectorXd::Zero(n_eff);
    return out;
  }

  Eigen::VectorXd resid;
  auto objective = [&](const Eigen::VectorXd& u) {
    const SarimaParams params = params_from_unconstrained(spec, u);
    const Polys polys = model_polys(spec, params);
    const double sse = css_sse(lag_terms(polys.ar, true), lag_terms(polys.ma, false), work.w, start, resid);
    return -profiled_loglik(sse, n_eff);
  };

  Eigen::VectorXd best_u = Eigen::VectorXd::Zero(k);
  double best_value = std::numeric_limits<double>::infinity();
  bool best_converged = k == 0;
  int iterations = 0;
  const int starts = k == 0 ? 1 : std::max(1, opt.starts);
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd u0 = Eigen::VectorXd::Zero(k);
    if (s > 0) {
      Rng rng(seed, static_cast<std::uint64_t>(s));
      for (Eigen::Index i = 0; i < k; ++i) u0(i) = 0.8 * rng.normal();
    }
    out.start_logliks.push_back(-objective(u0));
    if (k == 0) {
      best_value = objective(u0);
      break;
    }
    NelderMeadResult run = nelder_mead(objective, u0, opt.optimizer);
    NelderMeadOptions polish = opt.optimizer;
    polish.initial_step = 0.05;
    NelderMeadResult refined = nelder_mead(objective, run.x, polish);
    iterations += run.iterations + refined.iterations;
    if (refined.value <= run.value) {
      run.x = refined.x;
      run.value = refined.value;
      run.converged = refined.converged;
    }
    if (run.value < best_value) {
      best_value = run.value;
      best_u = run.x;
      best_converged = run.converged;
    }
  }

  SarimaParams params = params_from_unconstrained(spec, best_u);
  enforce_margin(params.phi, false);
  enforce_margin(params.seasonal_phi, false);
  enforce_margin(params.theta, true);
  enforce_margin(params.seasonal_theta, true);

  const CssResult css = css_evaluate(spec, params, y, opt.condition);
  params.sigma2 = css.sigma2;
  out.params = std::move(params);
  out.loglik = css.loglik;
  out.aic = 2.0 * spec.n_params() - 2.0 * css.loglik;
  out.residuals = css.residuals;
  out.converged = best_converged;
  out.iterations = iterations;
  return out;
}

GridResult grid_search(const Eigen::VectorXd& y, const GridOptions& opt) {
  std::vector<SarimaSpec> cells;
  for (int p = 0; p <= opt.p_max; ++p)
    for (int q = 0; q <= opt.q_max; ++q)
      for (int P = 0; P <= opt.P_max; ++P)
        for (int Q = 0; Q <= opt.Q_max; ++Q) cells.push_back({p, opt.d, q, P, opt.D, Q, opt.s});
  std::sort(cells.begin(), cells.end());

  FitOptions fit_opt = opt.fit;
  fit_opt.condition = std::max(fit_opt.condition, opt.p_max + opt.P_max * opt.s);

  std::vector<std::optional<FittedSarima>> fits(cells.size());
  std::vector<std::string> errors(cells.size());
  auto run_cell = [&](std::size_t i) {
    try {
      FittedSarima f = fit(cells[i], y, opt.seed, fit_opt);
      if (std::isnan(f.aic)) throw Error(ErrorKind::NumericalBreakdown, "AIC is not a number");
      fits[i] = std::move(f);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  };

  const int threads = std::max(1, std::min<int>(opt.threads, static_cast<int>(cells.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(i);
      });
    }
  }

  GridResult out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (fits[i]) out.ranked.push_back(std::move(*fits[i]));
    else out.failures.push_back({cells[i], errors[i]});
  }
  if (out.ranked.empty()) {
    throw Error(ErrorKind::AllFitsFailed,
                "all " + std::to_string(cells.size()) + " cells failed; first: " + (errors.empty() ? "" : errors.front()));
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const FittedSarima& a, const FittedSarima& b) {
    if (a.aic != b.aic) return a.aic < b.aic;
    if (a.spec.n_params() != b.spec.n_params()) return a.spec.n_params() < b.spec.n_params();
    return a.spec < b.spec;
  });
  return out;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd psi_weights(const SarimaSpec& spec, const SarimaParams& params, int h) {
  const Polys polys = model_polys(spec, params);
  const Eigen::VectorXd full_ar = poly_mul(polys.ar, diff_poly(spec.d, spec.D, spec.s));
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(h);
  if (h == 0) return psi;
  psi(0) = 1.0;
  for (int j = 1; j < h; ++j) {
    double v = j < polys.ma.size() ? polys.ma(j) : 0.0;
    for (int i = 1; i <= j && i < full_ar.size(); ++i) v -= full_ar(i) * psi(j - i);
    psi(j) = v;
  }
  return psi;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "quantile probability must lie in (0, 1)");
  // Acklam's rational approximation, then one Halley step on erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double low = 0.02425;
  double x;
  if (p < low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

Forecast forecast(const FittedSarima& f, const Eigen::VectorXd& y, int h, double level) {
  if (h < 1) throw Error(ErrorKind::HorizonZero, "forecast horizon must be at least 1");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "interval level must lie in (0, 1)");
  const SarimaSpec& spec = f.spec;
  const CssResult css = css_evaluate(spec, f.params, y);
  const Eigen::Index n = y.size();
  const Eigen::Index offset = spec.diff_span() + css.start;

  Eigen::VectorXd z(n + h);
  z.head(n) = y.array() - f.mean;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n + h);
  e.segment(offset, css.residuals.size()) = css.residuals;

  const Polys polys = model_polys(spec, f.params);
  const Eigen::VectorXd full_ar = poly_mul(polys.ar, diff_poly(spec.d, spec.D, spec.s));
  for (Eigen::Index t = n; t < n + h; ++t) {
    double v = 0.0;
    for (Eigen::Index i = 1; i < full_ar.size(); ++i) {
      if (full_ar(i) != 0.0 && t - i >= 0) v -= full_ar(i) * z(t - i);
    }
    for (Eigen::Index j = 1; j < polys.ma.size(); ++j) {
      if (polys.ma(j) != 0.0 && t - j >= 0) v += polys.ma(j) * e(t - j);
    }
    z(t) = v;
  }

  Forecast out;
  out.horizon = h;
  out.level = level;
  out.point = z.tail(h).array() + f.mean;
  const Eigen::VectorXd psi = psi_weights(spec, f.params, h);
  out.variance.resize(h);
  double acc = 0.0;
  for (int j = 0; j < h; ++j) {
    acc += psi(j) * psi(j);
    out.variance(j) = f.params.sigma2 * acc;
  }
  const double zq = normal_quantile(0.5 + level / 2.0);
  const Eigen::ArrayXd half = zq * out.variance.array().sqrt();
  out.lower = out.point.array() - half;
  out.upper = out.point.array() + half;
  return out;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd simulate_core(const SarimaSpec& spec, const SarimaParams& params, int n, std::uint64_t seed, int burn_in) {
  spec.validate();
  check_roots(spec, params);
  if (n < 1 || burn_in < 0) throw Error(ErrorKind::InvalidArgument, "simulation length must be positive");
  if (!(params.sigma2 >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise variance must be nonnegative");
  const Polys polys = model_polys(spec, params);
  const auto ar = lag_terms(polys.ar, true);
  const auto ma = lag_terms(polys.ma, false);
  const Eigen::Index total = static_cast<Eigen::Index>(n) + burn_in;
  const double sd = std::sqrt(params.sigma2);

  Rng rng(seed);
  Eigen::VectorXd e(total), w(total);
  for (Eigen::Index t = 0; t < total; ++t) {
    e(t) = sd * rng.normal();
    double v = e(t);
    for (const auto& term : ar)
      if (t - term.lag >= 0) v += term.weight * w(t - term.lag);
    for (const auto& term : ma)
      if (t - term.lag >= 0) v += term.weight * e(t - term.lag);
    w(t) = v;
  }
  return w.tail(n);
}

Eigen::VectorXd integrate(const Eigen::VectorXd& w, int d, int D, int s) {
  const Eigen::VectorXd delta = diff_poly(d, D, s);
  Eigen::VectorXd y(w.size());
  for (Eigen::Index t = 0; t < w.size(); ++t) {
    double v = w(t);
    for (Eigen::Index i = 1; i < delta.size() && i <= t; ++i) v -= delta(i) * y(t - i);
    y(t) = v;
  }
  return y;
}

Eigen::VectorXd simulate(const SarimaSpec& spec, const SarimaParams& params, int n, std::uint64_t seed, int burn_in) {
  return integrate(simulate_core(spec, params, n, seed, burn_in), spec.d, spec.D, spec.s);
}

}  // namespace episignal
