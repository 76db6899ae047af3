#include "mvgp/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace mvgp {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

void check_shapes(const KernelSpec& spec, const Eigen::MatrixXd& X,
                  const Eigen::MatrixXd& X2) {
  if (X.rows() == 0 || X2.rows() == 0)
    throw std::invalid_argument("eval_kernel: empty point set");
  for (int d : spec.input_dims) {
    if (d < 0 || d >= X.cols() || d >= X2.cols())
      throw std::invalid_argument("eval_kernel: input dimension out of range");
  }
  if (spec.family == KernelFamily::Linear || spec.family == KernelFamily::CategoricalDelta) {
    if (spec.input_dims.size() != 1)
      throw std::invalid_argument("eval_kernel: kernel expects a single input dimension");
  }
}

void check_integer_coded(const Eigen::MatrixXd& X, int d) {
  for (int i = 0; i < X.rows(); ++i) {
    const double v = X(i, d);
    if (std::nearbyint(v) != v)
      throw std::domain_error("categorical-delta kernel requires integer-coded covariates");
  }
}

/// Scaled distance r = sqrt(sum_d ((x_d - x'_d)/l_d)^2).
Eigen::MatrixXd scaled_distance(const KernelSpec& spec, const KernelParams& p,
                                const Eigen::MatrixXd& X, const Eigen::MatrixXd& X2) {
  Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(X.rows(), X2.rows());
  for (size_t k = 0; k < spec.input_dims.size(); ++k) {
    const int d = spec.input_dims[k];
    const double inv_l = 1.0 / p.lengthscales[static_cast<int>(k)];
    r2 += ((X.col(d).replicate(1, X2.rows()) -
            X2.col(d).transpose().replicate(X.rows(), 1)) *
           inv_l)
              .array()
              .square()
              .matrix();
  }
  return r2.array().sqrt().matrix();
}

}  // namespace

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "matern32") return KernelFamily::Matern32;
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "linear") return KernelFamily::Linear;
  if (name == "categorical-delta") return KernelFamily::CategoricalDelta;
  throw std::invalid_argument("unknown kernel family: " + name);
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Matern32: return "matern32";
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Linear: return "linear";
    case KernelFamily::CategoricalDelta: return "categorical-delta";
  }
  return "?";
}

void KernelParams::validate(const KernelSpec& spec) const {
  if (lengthscales.size() != spec.n_lengthscales())
    throw std::invalid_argument("kernel params: wrong number of length-scales");
  for (int i = 0; i < lengthscales.size(); ++i)
    if (!(lengthscales[i] > 0.0) || !std::isfinite(lengthscales[i]))
      throw std::domain_error("kernel params: length-scales must be finite and positive");
  if (spec.has_variance() && (!(variance > 0.0) || !std::isfinite(variance)))
    throw std::domain_error("kernel params: variance must be finite and positive");
}

Eigen::MatrixXd eval_kernel(const KernelSpec& spec, const KernelParams& params,
                            const Eigen::MatrixXd& X, const Eigen::MatrixXd& X2) {
  params.validate(spec);
  check_shapes(spec, X, X2);
  const double s2 = spec.has_variance() ? params.variance : 1.0;
  const int d0 = spec.input_dims.empty() ? 0 : spec.input_dims[0];

  switch (spec.family) {
    case KernelFamily::Matern32: {
      Eigen::MatrixXd r = scaled_distance(spec, params, X, X2);
      return s2 * ((1.0 + kSqrt3 * r.array()) * (-kSqrt3 * r.array()).exp()).matrix();
    }
    case KernelFamily::Gaussian: {
      Eigen::MatrixXd r = scaled_distance(spec, params, X, X2);
      return s2 * (-0.5 * r.array().square()).exp().matrix();
    }
    case KernelFamily::Linear:
      return s2 * X.col(d0) * X2.col(d0).transpose();
    case KernelFamily::CategoricalDelta: {
      check_integer_coded(X, d0);
      check_integer_coded(X2, d0);
      Eigen::MatrixXd out(X.rows(), X2.rows());
      for (int i = 0; i < X.rows(); ++i)
        for (int j = 0; j < X2.rows(); ++j)
          out(i, j) = (X(i, d0) == X2(j, d0)) ? s2 : 0.0;
      return out;
    }
  }
  throw std::logic_error("eval_kernel: unreachable");
}

std::vector<Eigen::MatrixXd> kernel_param_grads(const KernelSpec& spec,
                                                const KernelParams& params,
                                                const Eigen::MatrixXd& X,
                                                const Eigen::MatrixXd& X2) {
  params.validate(spec);
  check_shapes(spec, X, X2);
  std::vector<Eigen::MatrixXd> grads;
  grads.reserve(static_cast<size_t>(spec.n_params()));
  const double s2 = spec.has_variance() ? params.variance : 1.0;

  if (spec.family == KernelFamily::Matern32 || spec.family == KernelFamily::Gaussian) {
    const Eigen::MatrixXd r = scaled_distance(spec, params, X, X2);
    for (size_t k = 0; k < spec.input_dims.size(); ++k) {
      const int d = spec.input_dims[k];
      const double l = params.lengthscales[static_cast<int>(k)];
      // (x_d - x'_d)^2 / l^2, i.e. the k-th term of r^2
      Eigen::MatrixXd rk2 = ((X.col(d).replicate(1, X2.rows()) -
                              X2.col(d).transpose().replicate(X.rows(), 1)) /
                             l)
                                .array()
                                .square()
                                .matrix();
      if (spec.family == KernelFamily::Matern32) {
        // dK/dlog l_k = 3 s2 exp(-sqrt3 r) * rk2
        grads.push_back(
            (3.0 * s2 * (-kSqrt3 * r.array()).exp() * rk2.array()).matrix());
      } else {
        // dK/dlog l_k = K * rk2
        grads.push_back(
            (s2 * (-0.5 * r.array().square()).exp() * rk2.array()).matrix());
      }
    }
  }
  if (spec.has_variance()) {
    KernelSpec unit = spec;
    grads.push_back(eval_kernel(unit, params, X, X2));  // dK/dlog s2 = K
  }
  return grads;
}

}  // namespace mvgp
