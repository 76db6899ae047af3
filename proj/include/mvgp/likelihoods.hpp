#ifndef MVGP_LIKELIHOODS_HPP
#define MVGP_LIKELIHOODS_HPP

#include <string>

namespace mvgp {

enum class ObsKind { BinomialLogit, NegBin, Poisson, Gaussian };

ObsKind obs_kind_from_string(const std::string& name);
std::string to_string(ObsKind kind);

/// Observation model for one species. NegBin carries the over-dispersion r,
/// Gaussian the noise variance; both are optimized on the log scale.
struct ObsModel {
  ObsKind kind = ObsKind::Gaussian;
  double overdispersion = 1.0;   // r > 0 (negbin)
  double noise_variance = 1.0;   // sigma_n^2 > 0 (gaussian)

  bool has_param() const { return kind == ObsKind::NegBin || kind == ObsKind::Gaussian; }
  double param() const { return kind == ObsKind::NegBin ? overdispersion : noise_variance; }
  void set_param(double value) {
    if (kind == ObsKind::NegBin) overdispersion = value;
    else noise_variance = value;
  }
  void validate() const;
};

/// Validates a single observation (y, z) against the model's domain.
void validate_observation(const ObsModel& model, double y, double z);

/// Exact log density of y given latent value f and effort/trials z.
double loglik(const ObsModel& model, double y, double z, double f);

struct GradHess {
  double grad = 0.0;  // d log p / df
  double hess = 0.0;  // d^2 log p / df^2 (<= 0 for all implemented models)
};
GradHess loglik_grad_hess(const ObsModel& model, double y, double z, double f);

/// d^3 log p / df^3, used by the implicit part of the marginal gradient.
double loglik_d3(const ObsModel& model, double y, double z, double f);

/// Derivatives with respect to the model's own parameter in log coordinates
/// (log r for negbin, log sigma_n^2 for gaussian); zero-parameter models
/// return all zeros.
struct ParamDerivs {
  double dloglik = 0.0;  // d log p / d log tau
  double dgrad = 0.0;    // d^2 log p / df dlog tau
  double dW = 0.0;       // d W / d log tau, W = -d^2 log p/df^2
};
ParamDerivs loglik_param_derivs(const ObsModel& model, double y, double z, double f);

}  // namespace mvgp

#endif
