#include "mvgp/moments.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "mvgp/stats.hpp"

namespace mvgp {

namespace {

/// Gauss-Legendre rule on [-1, 1] via the Jacobi-matrix eigenproblem.
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      const double off = k / std::sqrt(4.0 * k * k - 1.0);
      jac(k, k - 1) = off;
      jac(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    x.resize(static_cast<size_t>(n));
    w.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      x[static_cast<size_t>(i)] = es.eigenvalues()[i];
      const double v = es.eigenvectors()(0, i);
      w[static_cast<size_t>(i)] = 2.0 * v * v;
    }
  }
};

const GaussLegendre& gl_rule(int n) {
  static const GaussLegendre g6(6), g12(12), g20(20);
  switch (n) {
    case 6: return g6;
    case 12: return g12;
    default: return g20;
  }
}

}  // namespace

// Drezner/Genz-style evaluation: Gauss-Legendre quadrature of the
// correlation integral for moderate |rho| and the transformed tail form
// near |rho| = 1. Upper-quadrant probability P(X > h, Y > k).
static double bvn_upper(double h, double k, double r) {
  const double twopi = 2.0 * pi();
  const int ng = (std::abs(r) < 0.3) ? 6 : (std::abs(r) < 0.75 ? 12 : 20);
  const GaussLegendre& rule = gl_rule(ng);

  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    if (std::abs(r) > 0.0) {
      const double hs = 0.5 * (h * h + k * k);
      const double asr = std::asin(r);
      for (size_t i = 0; i < rule.x.size(); ++i)
        for (int is = -1; is <= 1; is += 2) {
          const double sn = std::sin(0.5 * asr * (is * rule.x[i] + 1.0));
          bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
      bvn *= asr / (2.0 * twopi);
    }
    return bvn + norm_cdf(-h) * norm_cdf(-k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -0.5 * (bs / as + hk);
    if (asr > -100.0)
      bvn = a * std::exp(asr) *
            (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (-hk < 100.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-0.5 * hk) * std::sqrt(twopi) * norm_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a *= 0.5;
    for (size_t i = 0; i < rule.x.size(); ++i)
      for (int is = -1; is <= 1; is += 2) {
        const double xs_ = a * (is * rule.x[i] + 1.0);
        const double xs = xs_ * xs_;
        const double rs = std::sqrt(1.0 - xs);
        asr = -0.5 * (bs / xs + hk);
        if (asr > -100.0)
          bvn += a * rule.w[i] * std::exp(asr) *
                 (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                  (1.0 + c * xs * (1.0 + d * xs)));
      }
    bvn = -bvn / twopi;
  }
  if (r > 0.0) return bvn + norm_cdf(-std::max(h, k));
  bvn = -bvn;
  if (k > h) bvn += norm_cdf(k) - norm_cdf(h);
  return bvn;
}

double bvn_cdf(double b1, double b2, double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) throw std::domain_error("bvn_cdf: |rho| must be <= 1");
  if (rho >= 1.0) return norm_cdf(std::min(b1, b2));
  if (rho <= -1.0) return std::max(0.0, norm_cdf(b1) - norm_cdf(-b2));
  const double p = bvn_upper(-b1, -b2, rho);
  return std::min(1.0, std::max(0.0, p));
}

double gauss_probit_integral(double mu, double sigma2, const Eigen::VectorXd& m,
                             const Eigen::VectorXd& v) {
  if (m.size() != v.size()) throw std::invalid_argument("gauss_probit_integral: |m| != |v|");
  if (sigma2 < 0.0) throw std::domain_error("gauss_probit_integral: sigma2 must be >= 0");
  for (int i = 0; i < v.size(); ++i)
    if (!(v[i] > 0.0)) throw std::domain_error("gauss_probit_integral: scales must be > 0");
  switch (m.size()) {
    case 1:
      return norm_cdf((mu - m[0]) / std::sqrt(v[0] * v[0] + sigma2));
    case 2: {
      const double s1 = std::sqrt(v[0] * v[0] + sigma2);
      const double s2 = std::sqrt(v[1] * v[1] + sigma2);
      const double rho = sigma2 / (s1 * s2);
      return bvn_cdf((mu - m[0]) / s1, (mu - m[1]) / s2, rho);
    }
    default:
      throw std::invalid_argument("gauss_probit_integral: only N in {1,2} is supported");
  }
}

double gauss_cdf_of_gauss_integral(const Eigen::VectorXd& mu, const Eigen::VectorXd& m,
                                   const Eigen::MatrixXd& V, const Eigen::MatrixXd& Sigma) {
  const int N = static_cast<int>(mu.size());
  if (m.size() != N || V.rows() != N || V.cols() != N || Sigma.rows() != N ||
      Sigma.cols() != N)
    throw std::invalid_argument("gauss_cdf_of_gauss_integral: inconsistent sizes");
  const Eigen::MatrixXd C = V + Sigma;
  switch (N) {
    case 1: {
      if (!(C(0, 0) > 0.0)) throw std::domain_error("gauss_cdf_of_gauss_integral: V+Sigma not PD");
      return norm_cdf((mu[0] - m[0]) / std::sqrt(C(0, 0)));
    }
    case 2: {
      const double s1 = std::sqrt(C(0, 0));
      const double s2 = std::sqrt(C(1, 1));
      const double rho = C(0, 1) / (s1 * s2);
      return bvn_cdf((mu[0] - m[0]) / s1, (mu[1] - m[1]) / s2, rho);
    }
    default:
      throw std::invalid_argument("gauss_cdf_of_gauss_integral: only N <= 2 is supported");
  }
}

double ProbitMixture::operator()(double f) const {
  return a * norm_cdf(f / v1) + (1.0 - a) * norm_cdf(f / v2);
}

namespace {

/// Sup-norm error of the mixture against the logistic on [0, hi] (the error
/// is an odd function of f, so one half-line suffices).
double mixture_sup_error(double a, double v1, double v2, int n_grid, double hi) {
  double worst = 0.0;
  for (int i = 0; i <= n_grid; ++i) {
    const double f = hi * i / n_grid;
    const double approx = a * norm_cdf(f / v1) + (1.0 - a) * norm_cdf(f / v2);
    worst = std::max(worst, std::abs(approx - logistic(f)));
  }
  return worst;
}

struct NmPoint {
  Eigen::Vector3d x;
  double value;
};

/// Nelder-Mead on (logit(a), log v1, log v2); robust enough for the
/// non-smooth minimax objective when polished from several starts.
Eigen::Vector3d nelder_mead_fit(const Eigen::Vector3d& start, int max_iter,
                                double (*objective)(const Eigen::Vector3d&)) {
  std::vector<NmPoint> simplex;
  simplex.push_back({start, objective(start)});
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d p = start;
    p[i] += 0.25;
    simplex.push_back({p, objective(p)});
  }
  auto by_value = [](const NmPoint& l, const NmPoint& r) { return l.value < r.value; };
  for (int it = 0; it < max_iter; ++it) {
    std::sort(simplex.begin(), simplex.end(), by_value);
    if (simplex.back().value - simplex.front().value < 1e-14) break;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (int i = 0; i < 3; ++i) centroid += simplex[static_cast<size_t>(i)].x;
    centroid /= 3.0;
    const Eigen::Vector3d refl = centroid + (centroid - simplex[3].x);
    const double f_refl = objective(refl);
    if (f_refl < simplex[0].value) {
      const Eigen::Vector3d expd = centroid + 2.0 * (centroid - simplex[3].x);
      const double f_expd = objective(expd);
      simplex[3] = (f_expd < f_refl) ? NmPoint{expd, f_expd} : NmPoint{refl, f_refl};
    } else if (f_refl < simplex[2].value) {
      simplex[3] = {refl, f_refl};
    } else {
      const Eigen::Vector3d contr = centroid + 0.5 * (simplex[3].x - centroid);
      const double f_contr = objective(contr);
      if (f_contr < simplex[3].value) {
        simplex[3] = {contr, f_contr};
      } else {
        for (int i = 1; i <= 3; ++i) {
          simplex[static_cast<size_t>(i)].x =
              simplex[0].x + 0.5 * (simplex[static_cast<size_t>(i)].x - simplex[0].x);
          simplex[static_cast<size_t>(i)].value = objective(simplex[static_cast<size_t>(i)].x);
        }
      }
    }
  }
  std::sort(simplex.begin(), simplex.end(), by_value);
  return simplex[0].x;
}

double mixture_objective(const Eigen::Vector3d& t) {
  const double a = logistic(t[0]);
  const double v1 = std::exp(t[1]);
  const double v2 = std::exp(t[2]);
  return mixture_sup_error(a, v1, v2, 4000, 10.0);
}

}  // namespace

ProbitMixture fit_probit_mixture(double required_error) {
  // A few spread-out starts; the minimax surface has a single useful basin
  // with the two scales split around the classical single-probit 1.70.
  const Eigen::Vector3d starts[] = {
      {std::log(0.44 / 0.56), std::log(2.3), std::log(1.3)},
      {0.0, std::log(1.0), std::log(2.0)},
      {0.5, std::log(3.0), std::log(1.5)},
      {-0.5, std::log(1.7), std::log(1.7)},
  };
  Eigen::Vector3d best;
  double best_err = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    const Eigen::Vector3d x = nelder_mead_fit(s, 4000, mixture_objective);
    const double err = mixture_objective(x);
    if (err < best_err) {
      best_err = err;
      best = x;
    }
  }
  ProbitMixture out;
  out.a = logistic(best[0]);
  out.v1 = std::exp(best[1]);
  out.v2 = std::exp(best[2]);
  // Certify on the full interval with a fine grid.
  double certified = 0.0;
  const int n = 100000;
  for (int i = 0; i <= n; ++i) {
    const double f = -10.0 + 20.0 * i / n;
    certified = std::max(certified, std::abs(out(f) - logistic(f)));
  }
  out.max_abs_error = certified;
  if (certified > required_error)
    throw std::runtime_error("fit_probit_mixture: certified error " +
                             std::to_string(certified) + " exceeds required " +
                             std::to_string(required_error));
  return out;
}

const ProbitMixture& default_probit_mixture() {
  static const ProbitMixture mixture = fit_probit_mixture();
  return mixture;
}

PredictiveMoments binomial_moments(double mu, double sigma2, double z,
                                   const ProbitMixture& mix) {
  if (sigma2 < 0.0) throw std::domain_error("binomial_moments: sigma2 must be >= 0");
  if (!(z > 0.0) || std::nearbyint(z) != z)
    throw std::domain_error("binomial_moments: z must be a positive integer");
  const double a = mix.a;
  const double s1 = std::sqrt(sigma2 + mix.v1 * mix.v1);
  const double s2 = std::sqrt(sigma2 + mix.v2 * mix.v2);
  const double mean_p = a * norm_cdf(mu / s1) + (1.0 - a) * norm_cdf(mu / s2);

  // E[p~^2] through the zero-mean bivariate CDF at (mu, mu) with covariance
  // [[sigma2 + v_m^2, sigma2], [sigma2, sigma2 + v_n^2]].
  auto F2 = [&](double vm, double vn) {
    const double sm = std::sqrt(sigma2 + vm * vm);
    const double sn = std::sqrt(sigma2 + vn * vn);
    const double rho = sigma2 / (sm * sn);
    return bvn_cdf(mu / sm, mu / sn, rho);
  };
  const double e_p2 = a * a * F2(mix.v1, mix.v1) + (1.0 - a) * (1.0 - a) * F2(mix.v2, mix.v2) +
                      2.0 * a * (1.0 - a) * F2(mix.v1, mix.v2);

  PredictiveMoments out;
  out.mean = z * mean_p;
  out.variance = out.mean - out.mean * out.mean + (z * z - z) * e_p2;
  out.variance = std::max(out.variance, 0.0);
  return out;
}

PredictiveMoments negbin_moments(double mu, double sigma2, double z, double r,
                                 bool printed_variant) {
  if (!(r > 0.0)) throw std::domain_error("negbin_moments: r must be > 0");
  if (!(z > 0.0)) throw std::domain_error("negbin_moments: z must be > 0");
  if (sigma2 < 0.0) throw std::domain_error("negbin_moments: sigma2 must be >= 0");
  PredictiveMoments out;
  out.mean = z * std::exp(mu + 0.5 * sigma2);
  const double e2 = z * z * std::exp(2.0 * mu + sigma2);
  const double bracket_exp = printed_variant ? 0.5 * sigma2 : sigma2;
  out.variance = out.mean + e2 * (std::exp(bracket_exp) * (r + 1.0) / r - 1.0);
  return out;
}

PredictiveMoments poisson_moments(double mu, double sigma2, double z) {
  PredictiveMoments out;
  out.mean = z * std::exp(mu + 0.5 * sigma2);
  const double e2 = z * z * std::exp(2.0 * mu + sigma2);
  out.variance = out.mean + e2 * (std::exp(sigma2) - 1.0);
  return out;
}

}  // namespace mvgp
