#ifndef MVGP_KERNELS_HPP
#define MVGP_KERNELS_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mvgp {

enum class KernelFamily { Matern32, Gaussian, Linear, CategoricalDelta };

KernelFamily kernel_family_from_string(const std::string& name);
std::string to_string(KernelFamily family);

/// Which kernel to evaluate and on which input columns. Correlation-form
/// kernels have unit variance and are the building blocks of LMC sums.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  std::vector<int> input_dims;  // column indices into the point matrix
  bool is_correlation = false;

  int n_lengthscales() const {
    switch (family) {
      case KernelFamily::Matern32:
      case KernelFamily::Gaussian:
        return static_cast<int>(input_dims.size());
      default:
        return 0;
    }
  }
  bool has_variance() const { return !is_correlation; }
  int n_params() const { return n_lengthscales() + (has_variance() ? 1 : 0); }
};

struct KernelParams {
  Eigen::VectorXd lengthscales;  // one per input dimension, > 0
  double variance = 1.0;         // ignored when spec.is_correlation

  void validate(const KernelSpec& spec) const;
};

/// Covariance matrix between the rows of X and X2 (points are rows; the
/// kernel reads the columns listed in spec.input_dims).
Eigen::MatrixXd eval_kernel(const KernelSpec& spec, const KernelParams& params,
                            const Eigen::MatrixXd& X, const Eigen::MatrixXd& X2);

/// Analytic dK/d(log theta), one matrix per parameter: length-scales first
/// (in input_dims order), then the variance when present.
std::vector<Eigen::MatrixXd> kernel_param_grads(const KernelSpec& spec,
                                                const KernelParams& params,
                                                const Eigen::MatrixXd& X,
                                                const Eigen::MatrixXd& X2);

}  // namespace mvgp

#endif
