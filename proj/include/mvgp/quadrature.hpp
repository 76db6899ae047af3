#ifndef MVGP_QUADRATURE_HPP
#define MVGP_QUADRATURE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace mvgp {

/// Gauss-Hermite rule for integrals of the form ∫ g(t) e^{-t^2} dt.
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  explicit GaussHermite(int n);

  /// ∫ g(f) N(f | mean, var) df
  template <typename F>
  double integrate_gaussian(F&& g, double mean, double var) const {
    const double s = std::sqrt(2.0 * var);
    double acc = 0.0;
    for (int i = 0; i < nodes.size(); ++i) acc += weights[i] * g(mean + s * nodes[i]);
    return acc / std::sqrt(M_PI);
  }

  /// log ∫ exp(log_g(f)) N(f | mean, var) df, accumulated in log space.
  template <typename F>
  double log_integrate_gaussian(F&& log_g, double mean, double var) const {
    const double s = std::sqrt(2.0 * var);
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(static_cast<size_t>(nodes.size()));
    for (int i = 0; i < nodes.size(); ++i) {
      terms[static_cast<size_t>(i)] = std::log(weights[i]) + log_g(mean + s * nodes[i]);
      mx = std::max(mx, terms[static_cast<size_t>(i)]);
    }
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - mx);
    return mx + std::log(acc) - 0.5 * std::log(M_PI);
  }
};

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-11, int max_depth = 40);

}  // namespace mvgp

#endif
