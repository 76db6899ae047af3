#ifndef MVGP_HYPEROPT_HPP
#define MVGP_HYPEROPT_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "mvgp/structure.hpp"

namespace mvgp {

/// Weakly informative prior settings in the constrained parameterization;
/// log densities are evaluated with the log-transform Jacobians included.
struct PriorSpec {
  double variance_scale2 = 4.0;  // Half-Student-t scale^2 on variances
  double variance_df = 4.0;
  double lengthscale_scale2 = 1.0;  // Half-Inverse-Student-t scale^2 on length-scales
  double lengthscale_df = 4.0;
  int corr_dof_delta = 1;       // v = J_active + delta for the correlation prior
  bool flat_log_overdispersion = true;  // improper flat prior on log r
};

/// Half-Student-t density (location 0) on x > 0 with squared scale s2, df nu.
double half_student_t_logpdf(double x, double s2, double nu);
double half_student_t_dlogpdf(double x, double s2, double nu);

/// Density of 1/X where X is Half-Student-t (location 0, scale^2 s2, df nu).
double half_inv_student_t_logpdf(double x, double s2, double nu);
double half_inv_student_t_dlogpdf(double x, double s2, double nu);

/// Sum of log prior densities over all hyperparameters in unconstrained
/// coordinates (transform Jacobians included) plus its gradient.
struct PriorEval {
  double logpdf = 0.0;
  Eigen::VectorXd grad;
};
PriorEval prior_logpdf_grad(const PriorSpec& spec, const ModelStructure& structure,
                            const Eigen::VectorXd& theta);

struct ScgOptions {
  int max_iter = 400;
  double grad_tol = 1e-4;  // inf-norm of the gradient at the solution
  int restarts = 1;
  double perturb_scale = 0.3;
  std::uint64_t seed = 0;
};

struct ScgResult {
  Eigen::VectorXd x;
  double value = 0.0;          // objective at x
  double grad_inf_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  int n_evals = 0;
  std::vector<double> trace;   // objective after each accepted step
};

/// Objective callback: value and gradient at x (minimization). Non-finite
/// values mark an infeasible point and reject the step.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Scaled conjugate gradients (Moller): CG directions with a
/// Levenberg-style scale driven by a one-sided Hessian-vector estimate; no
/// line search.
ScgResult scg_minimize(const Objective& objective, const Eigen::VectorXd& start,
                       const ScgOptions& opts = {});

/// Multi-restart wrapper around scg_minimize; keeps the best optimum.
ScgResult optimize_map(const Objective& objective, const Eigen::VectorXd& start,
                       const ScgOptions& opts = {});

}  // namespace mvgp

#endif
