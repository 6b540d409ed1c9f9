#include "episignal/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace episignal {

namespace {

double finite_or_inf(double v) { return std::isnan(v) ? std::numeric_limits<double>::infinity() : v; }

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opt) {
  const Eigen::Index n = x0.size();
  NelderMeadResult out;
  if (n == 0) {
    out.x = x0;
    out.value = finite_or_inf(f(x0));
    out.converged = true;
    return out;
  }

  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> fv(static_cast<std::size_t>(n + 1));
  for (Eigen::Index i = 0; i < n; ++i) simplex[static_cast<std::size_t>(i + 1)](i) += opt.initial_step;
  for (std::size_t i = 0; i < simplex.size(); ++i) fv[i] = finite_or_inf(f(simplex[i]));

  std::vector<std::size_t> order(simplex.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<Eigen::VectorXd> s2;
    std::vector<double> f2;
    for (auto i : order) {
      s2.push_back(simplex[i]);
      f2.push_back(fv[i]);
    }
    simplex = std::move(s2);
    fv = std::move(f2);
  };
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) d = std::max(d, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
    return d;
  };

  sort_simplex();
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    if (diameter() < opt.tol) {
      out.converged = true;
      break;
    }
    const std::size_t worst = simplex.size() - 1;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < worst; ++i) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = finite_or_inf(f(reflected));
    if (fr < fv[0]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = finite_or_inf(f(expanded));
      if (fe < fr) {
        simplex[worst] = expanded;
        fv[worst] = fe;
      } else {
        simplex[worst] = reflected;
        fv[worst] = fr;
      }
    } else if (fr < fv[worst - 1]) {
      simplex[worst] = reflected;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      const Eigen::VectorXd contracted =
          outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                  : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = finite_or_inf(f(contracted));
      if (fc < (outside ? fr : fv[worst])) {
        simplex[worst] = contracted;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
          fv[i] = finite_or_inf(f(simplex[i]));
        }
      }
    }
    sort_simplex();
  }
  if (!out.converged && diameter() < opt.tol) out.converged = true;
  out.x = simplex[0];
  out.value = fv[0];
  out.iterations = it;
  return out;
}

}  // namespace episignal
