#ifndef MVGP_STATS_HPP
#define MVGP_STATS_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mvgp {

inline constexpr double pi() { return 3.14159265358979323846; }
inline constexpr double log_2pi() { return 1.8378770664093454836; }

/// Standard normal density.
inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi());
}

inline double log_norm_pdf(double x, double mu, double var) {
  const double d = x - mu;
  return -0.5 * (log_2pi() + std::log(var) + d * d / var);
}

/// Standard normal CDF via erfc; accurate in both tails.
inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// Numerically stable log(1 + exp(x)).
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Digamma function. Upward recurrence into the asymptotic region.
inline double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: x must be positive");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return result;
}

/// Log density of the Student-t distribution with df nu, location 0, scale s.
inline double student_t_logpdf(double x, double nu, double s) {
  const double z = x / s;
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * pi()) - std::log(s) -
         0.5 * (nu + 1.0) * std::log1p(z * z / nu);
}

/// d/dx of student_t_logpdf at fixed (nu, s).
inline double student_t_dlogpdf(double x, double nu, double s) {
  const double z = x / s;
  return -(nu + 1.0) * z / (nu + z * z) / s;
}

/// Log of the multivariate gamma function Gamma_J(a).
inline double log_multigamma(int J, double a) {
  double out = 0.25 * J * (J - 1) * std::log(pi());
  for (int i = 1; i <= J; ++i) out += std::lgamma(a + 0.5 * (1 - i));
  return out;
}

}  // namespace mvgp

#endif
