#include "mvgp/fit.hpp"

#include <cmath>

namespace mvgp {

MapObjective::MapObjective(const ModelStructure& structure, const BlockLayout& layout,
                           const LikelihoodData& data, const PriorSpec& priors,
                           std::uint64_t size_cap_bytes, LaplaceOptions laplace_opts)
    : structure_(structure),
      layout_(layout),
      data_(data),
      priors_(priors),
      size_cap_(size_cap_bytes),
      laplace_opts_(laplace_opts) {}

CovarianceModel MapObjective::covariance(const Eigen::VectorXd& theta) const {
  return CovarianceModel(structure_, layout_, structure_.unpack(theta), size_cap_);
}

LaplaceState MapObjective::laplace(const Eigen::VectorXd& theta) const {
  LikelihoodData data = data_;
  data.models = structure_.unpack(theta).obs;
  return find_latent_map(covariance(theta).C(), data, laplace_opts_);
}

void MapObjective::log_q_grad(const Eigen::VectorXd& theta, double& log_q,
                              Eigen::VectorXd& grad) const {
  const ModelParams params = structure_.unpack(theta);
  const CovarianceModel cov(structure_, layout_, params, size_cap_);
  LikelihoodData data = data_;
  data.models = params.obs;
  const LaplaceState st = find_latent_map(cov.C(), data, laplace_opts_);
  log_q = st.log_q;

  const MarginalGradWork work = marginal_grad_work(st, data);
  grad = Eigen::VectorXd::Zero(structure_.n_params());
  cov.for_each_cov_grad([&](int k, const Eigen::MatrixXd& dC) {
    grad[k] = marginal_grad_cov(st, work, dC);
  });
  for (int k = 0; k < structure_.n_params(); ++k) {
    const ModelStructure::Entry& e = structure_.schema[static_cast<size_t>(k)];
    if (e.kind == ParamKind::LogLikParam)
      grad[k] = marginal_grad_likparam(st, work, data, e.species);
  }
}

double MapObjective::log_q(const Eigen::VectorXd& theta) const {
  const ModelParams params = structure_.unpack(theta);
  const CovarianceModel cov(structure_, layout_, params, size_cap_);
  LikelihoodData data = data_;
  data.models = params.obs;
  return find_latent_map(cov.C(), data, laplace_opts_).log_q;
}

double MapObjective::negative_log_posterior(const Eigen::VectorXd& theta,
                                            Eigen::VectorXd& grad) const {
  grad = Eigen::VectorXd::Zero(structure_.n_params());
  double lq;
  Eigen::VectorXd grad_q;
  try {
    log_q_grad(theta, lq, grad_q);
  } catch (const NewtonError&) {
    return std::numeric_limits<double>::infinity();
  }
  const PriorEval prior = prior_logpdf_grad(priors_, structure_, theta);
  grad = -(grad_q + prior.grad);
  return -(lq + prior.logpdf);
}

Objective MapObjective::as_objective() const {
  return [this](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    return negative_log_posterior(theta, grad);
  };
}

ScgResult fit_map(const MapObjective& objective, const Eigen::VectorXd& start,
                  const ScgOptions& opts) {
  return optimize_map(objective.as_objective(), start, opts);
}

}  // namespace mvgp
