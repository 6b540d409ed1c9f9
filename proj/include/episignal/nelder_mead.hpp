#pragma once

#include <Eigen/Dense>

#include <functional>

namespace episignal {

struct NelderMeadOptions {
  int max_iter = 2000;
  /// Stop once every vertex lies within this distance (max-norm) of the best one.
  double tol = 1e-8;
  double initial_step = 0.5;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free minimisation with the standard reflection, expansion,
/// contraction and shrink coefficients (1, 2, 1/2, 1/2).
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opt = {});

}  // namespace episignal
