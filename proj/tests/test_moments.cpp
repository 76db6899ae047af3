#include <doctest.h>

#include <cmath>
#include <random>

#include "mvgp/moments.hpp"
#include "mvgp/quadrature.hpp"
#include "mvgp/rng.hpp"
#include "mvgp/stats.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace mvgp;

namespace {

/// 1-D quadrature oracle for the bivariate CDF:
/// P(Z1<=b1, Z2<=b2) = int_{-inf}^{b1} phi(x) Phi((b2 - rho x)/sqrt(1-rho^2)) dx
double bvn_oracle(double b1, double b2, double rho) {
  const double s = std::sqrt(1.0 - rho * rho);
  auto integrand = [&](double x) { return norm_pdf(x) * norm_cdf((b2 - rho * x) / s); };
  const double lo = std::min(b1, -10.0) - 2.0;
  return adaptive_simpson(integrand, lo, b1, 1e-13);
}

}  // namespace

TEST_CASE("bvn independence factorization") {
  for (double b1 : {-1.3, 0.0, 0.8})
    for (double b2 : {-0.4, 1.9})
      CHECK(bvn_cdf(b1, b2, 0.0) ==
            doctest::Approx(norm_cdf(b1) * norm_cdf(b2)).epsilon(1e-13));
}

TEST_CASE("bvn orthant identity at the origin") {
  for (double rho : {-0.95, -0.5, -0.1, 0.3, 0.7, 0.99})
    CHECK(bvn_cdf(0.0, 0.0, rho) ==
          doctest::Approx(0.25 + std::asin(rho) / (2.0 * pi())).epsilon(1e-12));
}

TEST_CASE("bvn degenerate correlations") {
  CHECK(bvn_cdf(0.3, 0.3, 1.0) == doctest::Approx(norm_cdf(0.3)).epsilon(1e-13));
  CHECK(bvn_cdf(1.2, 0.4, 1.0) == doctest::Approx(norm_cdf(0.4)).epsilon(1e-13));
  CHECK(bvn_cdf(0.5, -0.2, -1.0) ==
        doctest::Approx(std::max(0.0, norm_cdf(0.5) - norm_cdf(0.2))).epsilon(1e-13));
}

TEST_CASE("bvn against the quadrature oracle over a parameter sweep") {
  std::mt19937 gen(31);
  std::uniform_real_distribution<double> ub(-4.0, 4.0);
  std::uniform_real_distribution<double> ur(-0.999, 0.999);
  double worst = 0.0;
  for (int rep = 0; rep < 400; ++rep) {
    const double b1 = ub(gen), b2 = ub(gen), rho = ur(gen);
    worst = std::max(worst, std::abs(bvn_cdf(b1, b2, rho) - bvn_oracle(b1, b2, rho)));
  }
  // also stress the high-correlation branch
  for (double rho : {0.93, 0.97, 0.995, -0.93, -0.995})
    for (double b1 : {-2.5, -0.3, 0.6, 3.0})
      for (double b2 : {-1.7, 0.0, 2.2})
        worst = std::max(worst, std::abs(bvn_cdf(b1, b2, rho) - bvn_oracle(b1, b2, rho)));
  CHECK(worst < 1e-10);
}

TEST_CASE("lemma-1 integral, scalar case") {
  VectorXd m(1), v(1);
  m << 0.0;
  v << 1.0;
  CHECK(gauss_probit_integral(0.0, 1.0, m, v) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(gauss_probit_integral(1.0, 3.0, m, v) ==
        doctest::Approx(0.6914624612740131).epsilon(1e-12));
}

TEST_CASE("lemma-1 against adaptive quadrature, N = 1 and 2") {
  std::mt19937 gen(37);
  std::uniform_real_distribution<double> um(-2.0, 2.0);
  std::uniform_real_distribution<double> uv(0.3, 2.5);
  std::uniform_real_distribution<double> us(0.05, 4.0);
  double worst1 = 0.0, worst2 = 0.0;
  for (int rep = 0; rep < 150; ++rep) {
    const double mu = um(gen), s2 = us(gen);
    const double sd = std::sqrt(s2);
    {
      VectorXd m(1), v(1);
      m << um(gen);
      v << uv(gen);
      auto f = [&](double x) {
        return std::exp(log_norm_pdf(x, mu, s2)) * norm_cdf((x - m[0]) / v[0]);
      };
      const double oracle = adaptive_simpson(f, mu - 12 * sd, mu + 12 * sd, 1e-12);
      worst1 = std::max(worst1, std::abs(gauss_probit_integral(mu, s2, m, v) - oracle));
    }
    {
      VectorXd m(2), v(2);
      m << um(gen), um(gen);
      v << uv(gen), uv(gen);
      auto f = [&](double x) {
        return std::exp(log_norm_pdf(x, mu, s2)) * norm_cdf((x - m[0]) / v[0]) *
               norm_cdf((x - m[1]) / v[1]);
      };
      const double oracle = adaptive_simpson(f, mu - 12 * sd, mu + 12 * sd, 1e-12);
      worst2 = std::max(worst2, std::abs(gauss_probit_integral(mu, s2, m, v) - oracle));
    }
  }
  CHECK(worst1 < 1e-9);
  CHECK(worst2 < 1e-7);
}

TEST_CASE("lemma-1 rejects unsupported dimension") {
  VectorXd m = VectorXd::Zero(3), v = VectorXd::Ones(3);
  CHECK_THROWS_AS(gauss_probit_integral(0, 1, m, v), std::invalid_argument);
}

TEST_CASE("lemma-2 point mass and quadrature checks") {
  VectorXd mu(1), m(1);
  MatrixXd V(1, 1), Z(1, 1);
  mu << 0.7;
  m << -0.3;
  V << 1.4;
  Z << 0.0;
  CHECK(gauss_cdf_of_gauss_integral(mu, m, V, Z) ==
        doctest::Approx(norm_cdf((0.7 + 0.3) / std::sqrt(1.4))).epsilon(1e-13));

  std::mt19937 gen(41);
  std::uniform_real_distribution<double> um(-1.5, 1.5);
  std::uniform_real_distribution<double> uv(0.2, 2.0);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    mu << um(gen);
    m << um(gen);
    V << uv(gen);
    Z << uv(gen);
    auto f = [&](double x) {
      return norm_cdf((x - m[0]) / std::sqrt(V(0, 0))) *
             std::exp(log_norm_pdf(x, mu[0], Z(0, 0)));
    };
    const double sd = std::sqrt(Z(0, 0));
    const double oracle = adaptive_simpson(f, mu[0] - 12 * sd, mu[0] + 12 * sd, 1e-12);
    worst = std::max(worst, std::abs(gauss_cdf_of_gauss_integral(mu, m, V, Z) - oracle));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("probit mixture basic properties") {
  const ProbitMixture& mx = default_probit_mixture();
  CHECK(mx(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  for (double f : {0.3, 1.7, 4.2})
    CHECK(mx(-f) == doctest::Approx(1.0 - mx(f)).epsilon(1e-13));
  CHECK(mx.a > 0.0);
  CHECK(mx.a < 1.0);
  // The 2-component family bottoms out at 5.101e-4 sup error; the fit must
  // land on that floor.
  CHECK(mx.max_abs_error < 5.2e-4);
  CHECK(mx.max_abs_error > 4.0e-4);
}

TEST_CASE("binomial moments at a degenerate latent") {
  const PredictiveMoments pm = binomial_moments(0.0, 0.0, 10, default_probit_mixture());
  CHECK(pm.mean == doctest::Approx(5.0).epsilon(2e-3));
  CHECK(pm.variance == doctest::Approx(2.5).epsilon(2e-2));
}

TEST_CASE("binomial moments saturate") {
  const PredictiveMoments pm = binomial_moments(-30.0, 1.0, 10, default_probit_mixture());
  CHECK(pm.mean < 1e-8);
  CHECK(pm.variance < 1e-6);
  CHECK(pm.variance >= 0.0);
}

TEST_CASE("binomial mean is monotone in mu") {
  const ProbitMixture& mx = default_probit_mixture();
  double prev = -1.0;
  for (double mu = -4.0; mu <= 4.0; mu += 0.25) {
    const double mean = binomial_moments(mu, 1.3, 7, mx).mean;
    CHECK(mean > prev);
    prev = mean;
  }
}

TEST_CASE("binomial moments against Monte Carlo") {
  Rng rng(2024);
  const ProbitMixture& mx = default_probit_mixture();
  std::mt19937 gen(43);
  std::uniform_real_distribution<double> umu(-2.0, 2.0);
  std::uniform_real_distribution<double> us(0.05, 3.0);
  std::uniform_int_distribution<int> uz(1, 40);
  for (int rep = 0; rep < 8; ++rep) {
    const double mu = umu(gen), s2 = us(gen);
    const double z = uz(gen);
    const long draws = 2000000;
    double acc_p = 0.0, acc_p2 = 0.0;
    for (long i = 0; i < draws; ++i) {
      const double p = logistic(mu + std::sqrt(s2) * rng.normal());
      acc_p += p;
      acc_p2 += p * p;
    }
    const double ep = acc_p / draws, ep2 = acc_p2 / draws;
    const double mc_mean = z * ep;
    const double mc_var = z * (ep - ep2) + z * z * (ep2 - ep * ep);
    const PredictiveMoments pm = binomial_moments(mu, s2, z, mx);
    CHECK(pm.mean == doctest::Approx(mc_mean).epsilon(0.005));
    CHECK(pm.variance == doctest::Approx(mc_var).epsilon(0.02));
  }
}

TEST_CASE("negbin moments, degenerate latent") {
  const PredictiveMoments pm = negbin_moments(0.4, 0.0, 2.0, 3.0);
  const double m = 2.0 * std::exp(0.4);
  CHECK(pm.mean == doctest::Approx(m).epsilon(1e-12));
  CHECK(pm.variance == doctest::Approx(m + m * m / 3.0).epsilon(1e-12));
}

TEST_CASE("negbin moments against Monte Carlo and the poisson limit") {
  Rng rng(77);
  std::mt19937 gen(47);
  std::uniform_real_distribution<double> umu(-1.5, 1.5);
  std::uniform_real_distribution<double> us(0.05, 2.0);
  std::uniform_real_distribution<double> ur(0.5, 20.0);
  for (int rep = 0; rep < 8; ++rep) {
    const double mu = umu(gen), s2 = us(gen), r = ur(gen), z = 1.0 + (rep % 3);
    const long draws = 2000000;
    double acc_m = 0.0, acc_m2 = 0.0, acc_condvar = 0.0;
    for (long i = 0; i < draws; ++i) {
      const double m = z * std::exp(mu + std::sqrt(s2) * rng.normal());
      acc_m += m;
      acc_m2 += m * m;
      acc_condvar += m + m * m / r;
    }
    const double em = acc_m / draws;
    const double mc_mean = em;
    const double mc_var = acc_condvar / draws + acc_m2 / draws - em * em;
    const PredictiveMoments pm = negbin_moments(mu, s2, z, r);
    CHECK(pm.mean == doctest::Approx(mc_mean).epsilon(0.01));
    CHECK(pm.variance == doctest::Approx(mc_var).epsilon(0.03));
  }

  // r -> infinity gives the log-Gaussian-Poisson variance
  const PredictiveMoments pm = negbin_moments(0.3, 0.7, 1.5, 1e12);
  const PredictiveMoments pl = poisson_moments(0.3, 0.7, 1.5);
  CHECK(pm.variance == doctest::Approx(pl.variance).epsilon(1e-6));

  // the printed variant disagrees with the law of total variance
  const PredictiveMoments printed = negbin_moments(0.3, 0.7, 1.5, 2.0, true);
  CHECK(printed.variance != doctest::Approx(negbin_moments(0.3, 0.7, 1.5, 2.0).variance));
}

TEST_CASE("variance nonnegativity over random inputs") {
  const ProbitMixture& mx = default_probit_mixture();
  std::mt19937 gen(53);
  std::uniform_real_distribution<double> umu(-8.0, 8.0);
  std::uniform_real_distribution<double> us(0.0, 5.0);
  std::uniform_int_distribution<int> uz(1, 60);
  for (int rep = 0; rep < 10000; ++rep) {
    CHECK(binomial_moments(umu(gen), us(gen), uz(gen), mx).variance >= 0.0);
  }
}
