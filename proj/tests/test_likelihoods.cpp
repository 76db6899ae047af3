#include <doctest.h>

#include <cmath>
#include <random>

#include "mvgp/likelihoods.hpp"

using namespace mvgp;

namespace {

ObsModel binom() { return {ObsKind::BinomialLogit, 1.0, 1.0}; }
ObsModel negb(double r) { return {ObsKind::NegBin, r, 1.0}; }
ObsModel pois() { return {ObsKind::Poisson, 1.0, 1.0}; }
ObsModel gauss(double s2) { return {ObsKind::Gaussian, 1.0, s2}; }

}  // namespace

TEST_CASE("binomial symmetric point value") {
  CHECK(loglik(binom(), 3, 10, 0.0) == doctest::Approx(-2.143980062817408).epsilon(1e-12));
}

TEST_CASE("binomial stays finite at extreme latents") {
  CHECK(std::isfinite(loglik(binom(), 3, 10, 700.0)));
  CHECK(std::isfinite(loglik(binom(), 3, 10, -700.0)));
}

TEST_CASE("poisson unit rate at zero count") {
  CHECK(loglik(pois(), 0, 1, 0.0) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("negbin approaches poisson for huge r") {
  const double nb = loglik(negb(1e8), 2, 1, 0.0);
  CHECK(nb == doctest::Approx(std::log(1.0 / (2.0 * std::exp(1.0)))).epsilon(1e-6));
}

TEST_CASE("observation validation") {
  CHECK_THROWS_AS(loglik(binom(), 11, 10, 0.0), std::domain_error);
  CHECK_THROWS_AS(loglik(binom(), -1, 10, 0.0), std::domain_error);
  CHECK_THROWS_AS(loglik(binom(), 2.5, 10, 0.0), std::domain_error);
  CHECK_THROWS_AS(loglik(pois(), 2, 0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(loglik(negb(-1.0), 2, 1.0, 0.0), std::domain_error);
}

TEST_CASE("binomial gradient zero at the symmetric optimum") {
  const GradHess gh = loglik_grad_hess(binom(), 5, 10, 0.0);
  CHECK(gh.grad == doctest::Approx(0.0));
  CHECK(gh.hess < 0.0);
}

TEST_CASE("gaussian derivatives are the quadratic form") {
  const GradHess gh = loglik_grad_hess(gauss(0.5), 1.3, 1, 0.4);
  CHECK(gh.grad == doctest::Approx((1.3 - 0.4) / 0.5).epsilon(1e-14));
  CHECK(gh.hess == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(loglik_d3(gauss(0.5), 1.3, 1, 0.4) == 0.0);
}

TEST_CASE("derivatives match finite differences across models") {
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> uf(-2.5, 2.5);
  std::uniform_int_distribution<int> uy(0, 15);
  std::uniform_real_distribution<double> ur(0.4, 20.0);
  const double h = 1e-6;
  for (int rep = 0; rep < 100; ++rep) {
    const double f = uf(gen);
    struct Case {
      ObsModel m;
      double y, z;
    };
    const int y = uy(gen);
    const Case cases[] = {
        {binom(), static_cast<double>(std::min(y, 8)), 8.0},
        {negb(ur(gen)), static_cast<double>(y), 2.0},
        {pois(), static_cast<double>(y), 1.5},
        {gauss(0.3 + 0.1 * (rep % 7)), uf(gen), 1.0},
    };
    for (const Case& c : cases) {
      const double lp = loglik(c.m, c.y, c.z, f + h);
      const double lm = loglik(c.m, c.y, c.z, f - h);
      const GradHess gh = loglik_grad_hess(c.m, c.y, c.z, f);
      const double fd_grad = (lp - lm) / (2.0 * h);
      CHECK(gh.grad == doctest::Approx(fd_grad).epsilon(1e-6).scale(
                           std::max(1.0, std::abs(fd_grad))));
      const double gp = loglik_grad_hess(c.m, c.y, c.z, f + h).grad;
      const double gm = loglik_grad_hess(c.m, c.y, c.z, f - h).grad;
      const double fd_hess = (gp - gm) / (2.0 * h);
      CHECK(gh.hess == doctest::Approx(fd_hess).epsilon(1e-6).scale(
                           std::max(1.0, std::abs(fd_hess))));
      const double hp = loglik_grad_hess(c.m, c.y, c.z, f + h).hess;
      const double hm = loglik_grad_hess(c.m, c.y, c.z, f - h).hess;
      const double fd_d3 = (hp - hm) / (2.0 * h);
      CHECK(loglik_d3(c.m, c.y, c.z, f) ==
            doctest::Approx(fd_d3).epsilon(1e-5).scale(std::max(1.0, std::abs(fd_d3))));
    }
  }
}

TEST_CASE("log-concavity in f") {
  std::mt19937 gen(23);
  std::uniform_real_distribution<double> uf(-6.0, 6.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double f = uf(gen);
    CHECK(loglik_grad_hess(binom(), 3, 9, f).hess <= 0.0);
    CHECK(loglik_grad_hess(negb(2.3), 4, 1.2, f).hess <= 0.0);
    CHECK(loglik_grad_hess(pois(), 2, 0.7, f).hess <= 0.0);
    CHECK(loglik_grad_hess(gauss(0.9), 0.5, 1, f).hess <= 0.0);
  }
}

TEST_CASE("binomial normalization sums to one") {
  for (double f : {-1.5, 0.0, 2.0}) {
    double total = 0.0;
    for (int y = 0; y <= 7; ++y) total += std::exp(loglik(binom(), y, 7, f));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("negbin normalization accumulates to one") {
  double total = 0.0;
  const ObsModel m = negb(1.7);
  for (int y = 0; y <= 10000; ++y) total += std::exp(loglik(m, y, 2.0, 0.8));
  CHECK(total >= 1.0 - 1e-8);
  CHECK(total <= 1.0 + 1e-8);
}

TEST_CASE("likelihood parameter derivatives match finite differences") {
  std::mt19937 gen(29);
  std::uniform_real_distribution<double> uf(-1.5, 1.5);
  std::uniform_real_distribution<double> ur(0.5, 10.0);
  const double h = 1e-6;
  for (int rep = 0; rep < 60; ++rep) {
    const double f = uf(gen);
    {
      const double r = ur(gen);
      const double y = static_cast<double>(rep % 9);
      const ParamDerivs pd = loglik_param_derivs(negb(r), y, 1.4, f);
      auto at = [&](double logr) {
        return negb(std::exp(logr));
      };
      const double lr = std::log(r);
      CHECK(pd.dloglik == doctest::Approx((loglik(at(lr + h), y, 1.4, f) -
                                           loglik(at(lr - h), y, 1.4, f)) /
                                          (2 * h))
                              .epsilon(1e-5));
      CHECK(pd.dgrad == doctest::Approx((loglik_grad_hess(at(lr + h), y, 1.4, f).grad -
                                         loglik_grad_hess(at(lr - h), y, 1.4, f).grad) /
                                        (2 * h))
                            .epsilon(1e-5).scale(1.0));
      const double wp = -loglik_grad_hess(at(lr + h), y, 1.4, f).hess;
      const double wm = -loglik_grad_hess(at(lr - h), y, 1.4, f).hess;
      CHECK(pd.dW == doctest::Approx((wp - wm) / (2 * h)).epsilon(1e-5).scale(1.0));
    }
    {
      const double s2 = 0.2 + 0.3 * (rep % 5);
      const double y = uf(gen);
      const ParamDerivs pd = loglik_param_derivs(gauss(s2), y, 1, f);
      const double ls = std::log(s2);
      auto at = [&](double logs2) { return gauss(std::exp(logs2)); };
      CHECK(pd.dloglik == doctest::Approx((loglik(at(ls + h), y, 1, f) -
                                           loglik(at(ls - h), y, 1, f)) /
                                          (2 * h))
                              .epsilon(1e-5).scale(1.0));
    }
  }
}
