#include "mvgp/likelihoods.hpp"

#include <cmath>
#include <stdexcept>

#include "mvgp/stats.hpp"

namespace mvgp {

ObsKind obs_kind_from_string(const std::string& name) {
  if (name == "binomial" || name == "binomial-logit") return ObsKind::BinomialLogit;
  if (name == "negbin" || name == "negative-binomial") return ObsKind::NegBin;
  if (name == "poisson") return ObsKind::Poisson;
  if (name == "gaussian") return ObsKind::Gaussian;
  throw std::invalid_argument("unknown observation model: " + name);
}

std::string to_string(ObsKind kind) {
  switch (kind) {
    case ObsKind::BinomialLogit: return "binomial";
    case ObsKind::NegBin: return "negbin";
    case ObsKind::Poisson: return "poisson";
    case ObsKind::Gaussian: return "gaussian";
  }
  return "?";
}

void ObsModel::validate() const {
  if (kind == ObsKind::NegBin && (!(overdispersion > 0.0) || !std::isfinite(overdispersion)))
    throw std::domain_error("negbin: over-dispersion r must be finite and positive");
  if (kind == ObsKind::Gaussian && (!(noise_variance > 0.0) || !std::isfinite(noise_variance)))
    throw std::domain_error("gaussian: noise variance must be finite and positive");
}

void validate_observation(const ObsModel& model, double y, double z) {
  switch (model.kind) {
    case ObsKind::BinomialLogit:
      if (!(z > 0.0) || std::nearbyint(z) != z)
        throw std::domain_error("binomial: trial count z must be a positive integer");
      if (y < 0.0 || y > z || std::nearbyint(y) != y)
        throw std::domain_error("binomial: y must be an integer in [0, z]");
      break;
    case ObsKind::NegBin:
    case ObsKind::Poisson:
      if (!(z > 0.0)) throw std::domain_error("count model: effort z must be positive");
      if (y < 0.0 || std::nearbyint(y) != y)
        throw std::domain_error("count model: y must be a nonnegative integer");
      break;
    case ObsKind::Gaussian:
      if (!std::isfinite(y)) throw std::domain_error("gaussian: y must be finite");
      break;
  }
}

double loglik(const ObsModel& model, double y, double z, double f) {
  model.validate();
  validate_observation(model, y, z);
  switch (model.kind) {
    case ObsKind::BinomialLogit: {
      // log C(z,y) + y f - z log(1 + e^f); softplus keeps it finite for |f|
      // far beyond the overflow point of e^f.
      const double lchoose =
          std::lgamma(z + 1.0) - std::lgamma(y + 1.0) - std::lgamma(z - y + 1.0);
      return lchoose + y * f - z * softplus(f);
    }
    case ObsKind::NegBin: {
      const double r = model.overdispersion;
      const double log_m = std::log(z) + f;
      const double log_r_plus_m = (log_m > std::log(r))
                                      ? log_m + std::log1p(r * std::exp(-log_m))
                                      : std::log(r) + std::log1p(std::exp(log_m) / r);
      return std::lgamma(r + y) - std::lgamma(r) - std::lgamma(y + 1.0) +
             r * std::log(r) + y * log_m - (r + y) * log_r_plus_m;
    }
    case ObsKind::Poisson: {
      const double log_lambda = std::log(z) + f;
      return y * log_lambda - std::exp(log_lambda) - std::lgamma(y + 1.0);
    }
    case ObsKind::Gaussian: {
      return log_norm_pdf(y, f, model.noise_variance);
    }
  }
  throw std::logic_error("loglik: unreachable");
}

GradHess loglik_grad_hess(const ObsModel& model, double y, double z, double f) {
  model.validate();
  validate_observation(model, y, z);
  GradHess out;
  switch (model.kind) {
    case ObsKind::BinomialLogit: {
      const double p = logistic(f);
      out.grad = y - z * p;
      out.hess = -z * p * (1.0 - p);
      break;
    }
    case ObsKind::NegBin: {
      const double r = model.overdispersion;
      const double m = z * std::exp(f);
      out.grad = r * (y - m) / (r + m);
      out.hess = -r * m * (r + y) / ((r + m) * (r + m));
      break;
    }
    case ObsKind::Poisson: {
      const double lambda = z * std::exp(f);
      out.grad = y - lambda;
      out.hess = -lambda;
      break;
    }
    case ObsKind::Gaussian: {
      out.grad = (y - f) / model.noise_variance;
      out.hess = -1.0 / model.noise_variance;
      break;
    }
  }
  return out;
}

double loglik_d3(const ObsModel& model, double y, double z, double f) {
  switch (model.kind) {
    case ObsKind::BinomialLogit: {
      const double p = logistic(f);
      return -z * p * (1.0 - p) * (1.0 - 2.0 * p);
    }
    case ObsKind::NegBin: {
      const double r = model.overdispersion;
      const double m = z * std::exp(f);
      const double rm = r + m;
      return -r * m * (r + y) * (r - m) / (rm * rm * rm);
    }
    case ObsKind::Poisson:
      return -z * std::exp(f);
    case ObsKind::Gaussian:
      return 0.0;
  }
  throw std::logic_error("loglik_d3: unreachable");
}

ParamDerivs loglik_param_derivs(const ObsModel& model, double y, double z, double f) {
  ParamDerivs out;
  switch (model.kind) {
    case ObsKind::NegBin: {
      const double r = model.overdispersion;
      const double m = z * std::exp(f);
      const double rm = r + m;
      const double dl_dr = digamma(r + y) - digamma(r) + std::log(r) + 1.0 -
                           std::log(rm) - (r + y) / rm;
      out.dloglik = r * dl_dr;
      out.dgrad = r * m * (y - m) / (rm * rm);
      out.dW = r * m * (m * (2.0 * r + y) - r * y) / (rm * rm * rm);
      break;
    }
    case ObsKind::Gaussian: {
      const double s2 = model.noise_variance;
      const double d = y - f;
      out.dloglik = -0.5 + 0.5 * d * d / s2;
      out.dgrad = -d / s2;
      out.dW = -1.0 / s2;
      break;
    }
    default:
      break;
  }
  return out;
}

}  // namespace mvgp
