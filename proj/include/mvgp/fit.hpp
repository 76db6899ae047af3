#ifndef MVGP_FIT_HPP
#define MVGP_FIT_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "mvgp/hyperopt.hpp"
#include "mvgp/laplace.hpp"
#include "mvgp/structure.hpp"

namespace mvgp {

/// MAP objective log q(y|theta) + log pi(theta) over the packed
/// unconstrained coordinates, with the analytic gradient.
class MapObjective {
 public:
  MapObjective(const ModelStructure& structure, const BlockLayout& layout,
               const LikelihoodData& data, const PriorSpec& priors,
               std::uint64_t size_cap_bytes = (1ull << 31),
               LaplaceOptions laplace_opts = {});

  /// Laplace log marginal likelihood and its gradient at theta.
  void log_q_grad(const Eigen::VectorXd& theta, double& log_q, Eigen::VectorXd& grad) const;
  double log_q(const Eigen::VectorXd& theta) const;

  /// Negative log posterior for the minimizer; +inf marks Newton failure.
  double negative_log_posterior(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;
  Objective as_objective() const;

  LaplaceState laplace(const Eigen::VectorXd& theta) const;
  CovarianceModel covariance(const Eigen::VectorXd& theta) const;

  const ModelStructure& structure() const { return structure_; }
  const BlockLayout& layout() const { return layout_; }
  const LikelihoodData& data() const { return data_; }
  const PriorSpec& priors() const { return priors_; }

 private:
  const ModelStructure& structure_;
  const BlockLayout& layout_;
  const LikelihoodData& data_;
  PriorSpec priors_;
  std::uint64_t size_cap_;
  LaplaceOptions laplace_opts_;
};

/// MAP fit by scaled conjugate gradients with optional restarts.
ScgResult fit_map(const MapObjective& objective, const Eigen::VectorXd& start,
                  const ScgOptions& opts);

}  // namespace mvgp

#endif
