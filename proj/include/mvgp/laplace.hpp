#ifndef MVGP_LAPLACE_HPP
#define MVGP_LAPLACE_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "mvgp/likelihoods.hpp"

namespace mvgp {

/// Stacked observations in the species-major layout of the prior covariance.
struct LikelihoodData {
  Eigen::VectorXd y;
  Eigen::VectorXd z;
  std::vector<int> species;     // species id per stacked entry
  std::vector<ObsModel> models; // per species

  int size() const { return static_cast<int>(y.size()); }
  const ObsModel& model_of(int i) const {
    return models[static_cast<size_t>(species[static_cast<size_t>(i)])];
  }
  void validate() const;

  double loglik_sum(const Eigen::VectorXd& f) const;
  void grad_hess(const Eigen::VectorXd& f, Eigen::VectorXd& grad, Eigen::VectorXd& W) const;
};

struct LaplaceOptions {
  int max_iter = 100;
  double tol = 1e-6;       // inf-norm of the objective gradient
  int max_backtrack = 30;
};

/// Thrown when Newton does not reach the gradient tolerance.
struct NewtonError : std::runtime_error {
  double grad_norm;
  int iterations;
  NewtonError(double norm, int iters)
      : std::runtime_error("latent Newton did not converge: gradient inf-norm " +
                           std::to_string(norm) + " after " + std::to_string(iters) +
                           " iterations"),
        grad_norm(norm),
        iterations(iters) {}
};

/// Converged Laplace approximation around the latent MAP.
struct LaplaceState {
  Eigen::VectorXd f_hat;
  Eigen::VectorXd a;        // C^{-1} f_hat == grad log p(y|f_hat) at the optimum
  Eigen::VectorXd grad_ll;  // gradient of the log likelihood at f_hat
  Eigen::VectorXd W;        // site precisions (>= 0)
  Eigen::VectorXd sqrtW;
  Eigen::MatrixXd L;        // lower Cholesky of B = I + W^{1/2} C W^{1/2}
  Eigen::MatrixXd C;        // prior covariance used for the fit
  double log_q = 0.0;       // approximate log marginal likelihood
  double grad_norm = 0.0;
  int iterations = 0;
};

/// Newton iteration for the latent MAP with backtracking on the objective;
/// the B-form keeps every step well defined for PSD C and W >= 0.
LaplaceState find_latent_map(const Eigen::MatrixXd& C, const LikelihoodData& data,
                             const LaplaceOptions& opts = {});

/// Precomputed pieces shared by all hyperparameter gradient entries.
struct MarginalGradWork {
  Eigen::MatrixXd R;          // W^{1/2} B^{-1} W^{1/2} = (C + W^{-1})^{-1}
  Eigen::VectorXd post_diag;  // diag of (C^{-1} + W)^{-1}
  Eigen::VectorXd s2;         // dZ/df_hat (through W)
};
MarginalGradWork marginal_grad_work(const LaplaceState& state, const LikelihoodData& data);

/// d log q / d theta for a covariance hyperparameter with derivative dC,
/// including the implicit dependence through the latent MAP.
double marginal_grad_cov(const LaplaceState& state, const MarginalGradWork& work,
                         const Eigen::MatrixXd& dC);

/// d log q / d (log tau_j) for the likelihood parameter of one species.
double marginal_grad_likparam(const LaplaceState& state, const MarginalGradWork& work,
                              const LikelihoodData& data, int species);

struct LatentPredictive {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Predictive latent distribution given the cross covariance (test x train)
/// and the prior test covariance. Uses the stored B factor; C^{-1} is never
/// formed.
LatentPredictive predict_latent(const LaplaceState& state, const Eigen::MatrixXd& cross_cov,
                                const Eigen::MatrixXd& test_cov);

/// Marginal-only version for large batches: returns mean and pointwise
/// variance given the prior variances at the test points.
void predict_latent_diag(const LaplaceState& state, const Eigen::MatrixXd& cross_cov,
                         const Eigen::VectorXd& test_var, Eigen::VectorXd& mean,
                         Eigen::VectorXd& var);

/// Scenario prediction: a fresh latent MAP on the conditioning observations
/// alone, then Gaussian conditioning through the site-symmetrized form. An
/// empty conditioning set yields the prior at the test points.
LatentPredictive conditional_scenario(const Eigen::MatrixXd& C_scenario,
                                      const LikelihoodData& scenario_data,
                                      const Eigen::MatrixXd& cross_cov,
                                      const Eigen::MatrixXd& test_cov,
                                      const LaplaceOptions& opts = {});

}  // namespace mvgp

#endif
