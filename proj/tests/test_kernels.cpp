#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "mvgp/kernels.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace mvgp;

namespace {

KernelParams params1(double l, double s2) {
  KernelParams p;
  p.lengthscales = VectorXd::Constant(1, l);
  p.variance = s2;
  return p;
}

KernelParams params2(double l1, double l2, double s2) {
  KernelParams p;
  p.lengthscales.resize(2);
  p.lengthscales << l1, l2;
  p.variance = s2;
  return p;
}

MatrixXd random_points(int n, int d, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  MatrixXd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = dist(gen);
  return X;
}

}  // namespace

TEST_CASE("matern32 zero distance equals variance") {
  KernelSpec spec{KernelFamily::Matern32, {0}, false};
  MatrixXd X(1, 1);
  X << 0.7;
  const MatrixXd K = eval_kernel(spec, params1(0.31, 2.0), X, X);
  CHECK(K(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("gaussian correlation at unit distance") {
  KernelSpec spec{KernelFamily::Gaussian, {0}, true};
  MatrixXd X(1, 1), X2(1, 1);
  X << 0.0;
  X2 << 1.0;
  KernelParams p;
  p.lengthscales = VectorXd::Constant(1, 1.0);
  const MatrixXd K = eval_kernel(spec, p, X, X2);
  CHECK(K(0, 0) == doctest::Approx(0.6065306597126334).epsilon(1e-12));
}

TEST_CASE("matern32 closed form at scaled distance one") {
  KernelSpec spec{KernelFamily::Matern32, {0, 1}, false};
  MatrixXd X(1, 2), X2(1, 2);
  X << 0.0, 0.0;
  X2 << 1.0, 0.0;
  const MatrixXd K = eval_kernel(spec, params2(1.0, 1.0, 1.0), X, X2);
  CHECK(K(0, 0) == doctest::Approx(0.4833577245965077).epsilon(1e-12));
}

TEST_CASE("linear kernel annihilated by zero input") {
  KernelSpec spec{KernelFamily::Linear, {0}, false};
  MatrixXd X(1, 1), X2(1, 1);
  X << 0.0;
  X2 << 5.0;
  const MatrixXd K = eval_kernel(spec, params1(1.0, 3.0), X, X2);
  CHECK(K(0, 0) == 0.0);
}

TEST_CASE("categorical delta matches integer codes") {
  KernelSpec spec{KernelFamily::CategoricalDelta, {0}, false};
  MatrixXd X(3, 1);
  X << 0, 1, 1;
  KernelParams p;
  p.variance = 1.7;
  const MatrixXd K = eval_kernel(spec, p, X, X);
  CHECK(K(0, 1) == 0.0);
  CHECK(K(1, 2) == doctest::Approx(1.7));
  CHECK(K(1, 1) == doctest::Approx(1.7));

  MatrixXd bad(1, 1);
  bad << 0.5;
  CHECK_THROWS_AS(eval_kernel(spec, p, bad, bad), std::domain_error);
}

TEST_CASE("parameter validation") {
  KernelSpec spec{KernelFamily::Matern32, {0}, false};
  MatrixXd X = random_points(3, 1, 1);
  CHECK_THROWS_AS(eval_kernel(spec, params1(-1.0, 1.0), X, X), std::domain_error);
  CHECK_THROWS_AS(eval_kernel(spec, params1(1.0, 0.0), X, X), std::domain_error);
  KernelSpec wide{KernelFamily::Matern32, {0, 3}, false};
  CHECK_THROWS_AS(eval_kernel(wide, params2(1, 1, 1), X, X), std::invalid_argument);
}

TEST_CASE("symmetry and PSD on random inputs") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> unif(0.3, 3.0);
  for (auto family : {KernelFamily::Matern32, KernelFamily::Gaussian}) {
    KernelSpec spec{family, {0, 1}, false};
    for (int rep = 0; rep < 5; ++rep) {
      const MatrixXd X = random_points(30, 2, 100 + rep);
      const MatrixXd K = eval_kernel(spec, params2(unif(gen), unif(gen), unif(gen)), X, X);
      CHECK((K - K.transpose()).lpNorm<Eigen::Infinity>() < 1e-13);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(K);
      CHECK(es.eigenvalues().minCoeff() >= -1e-8 * es.eigenvalues().maxCoeff());
    }
  }
}

TEST_CASE("stationarity under input shifts") {
  for (auto family : {KernelFamily::Matern32, KernelFamily::Gaussian}) {
    KernelSpec spec{family, {0, 1}, false};
    const MatrixXd X = random_points(10, 2, 42);
    const MatrixXd shifted = X.array() + 3.25;
    const KernelParams p = params2(0.8, 1.7, 1.3);
    const MatrixXd K1 = eval_kernel(spec, p, X, X);
    const MatrixXd K2 = eval_kernel(spec, p, shifted, shifted);
    CHECK((K1 - K2).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("log-variance gradient equals the kernel itself") {
  for (auto family :
       {KernelFamily::Matern32, KernelFamily::Gaussian, KernelFamily::Linear}) {
    KernelSpec spec{family, {0}, false};
    const MatrixXd X = random_points(6, 1, 5);
    const KernelParams p = params1(0.9, 2.3);
    const MatrixXd K = eval_kernel(spec, p, X, X);
    const auto grads = kernel_param_grads(spec, p, X, X);
    CHECK((grads.back() - K).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("categorical delta variance gradient") {
  KernelSpec spec{KernelFamily::CategoricalDelta, {0}, false};
  MatrixXd X(3, 1);
  X << 0, 1, 0;
  KernelParams p;
  p.variance = 0.6;
  const auto grads = kernel_param_grads(spec, p, X, X);
  REQUIRE(grads.size() == 1);
  CHECK((grads[0] - eval_kernel(spec, p, X, X)).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("analytic gradients match central finite differences") {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> unif(0.4, 2.5);
  const double h = 1e-5;
  int checked = 0;
  for (auto family : {KernelFamily::Matern32, KernelFamily::Gaussian}) {
    KernelSpec spec{family, {0, 1}, false};
    for (int rep = 0; rep < 50; ++rep) {
      const MatrixXd X = random_points(7, 2, 500 + rep);
      const MatrixXd X2 = random_points(5, 2, 900 + rep);
      KernelParams p = params2(unif(gen), unif(gen), unif(gen));
      const auto grads = kernel_param_grads(spec, p, X, X2);
      Eigen::VectorXd logs(3);
      logs << std::log(p.lengthscales[0]), std::log(p.lengthscales[1]),
          std::log(p.variance);
      for (int q = 0; q < 3; ++q) {
        auto eval_at = [&](double bump) {
          KernelParams pb = p;
          Eigen::VectorXd lb = logs;
          lb[q] += bump;
          pb.lengthscales[0] = std::exp(lb[0]);
          pb.lengthscales[1] = std::exp(lb[1]);
          pb.variance = std::exp(lb[2]);
          return eval_kernel(spec, pb, X, X2);
        };
        const MatrixXd fd = (eval_at(h) - eval_at(-h)) / (2.0 * h);
        const double scale = std::max(1e-12, fd.lpNorm<Eigen::Infinity>());
        CHECK((grads[static_cast<size_t>(q)] - fd).lpNorm<Eigen::Infinity>() / scale < 1e-5);
        ++checked;
      }
    }
  }
  CHECK(checked >= 100);
}
