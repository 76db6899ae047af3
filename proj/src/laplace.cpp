#include "mvgp/laplace.hpp"

#include <cmath>

namespace mvgp {

void LikelihoodData::validate() const {
  if (z.size() != y.size() || static_cast<int>(species.size()) != y.size())
    throw std::invalid_argument("likelihood data: inconsistent sizes");
  for (int i = 0; i < size(); ++i) {
    const int s = species[static_cast<size_t>(i)];
    if (s < 0 || s >= static_cast<int>(models.size()))
      throw std::invalid_argument("likelihood data: species index out of range");
    validate_observation(models[static_cast<size_t>(s)], y[i], z[i]);
  }
}

double LikelihoodData::loglik_sum(const Eigen::VectorXd& f) const {
  double acc = 0.0;
  for (int i = 0; i < size(); ++i) acc += loglik(model_of(i), y[i], z[i], f[i]);
  return acc;
}

void LikelihoodData::grad_hess(const Eigen::VectorXd& f, Eigen::VectorXd& grad,
                               Eigen::VectorXd& W) const {
  grad.resize(size());
  W.resize(size());
  for (int i = 0; i < size(); ++i) {
    const GradHess gh = loglik_grad_hess(model_of(i), y[i], z[i], f[i]);
    grad[i] = gh.grad;
    W[i] = std::max(0.0, -gh.hess);  // log-concavity can leave tiny negative noise
  }
}

namespace {

/// chol(I + W^{1/2} C W^{1/2})
Eigen::MatrixXd chol_B(const Eigen::MatrixXd& C, const Eigen::VectorXd& sqrtW) {
  Eigen::MatrixXd B = sqrtW.asDiagonal() * C * sqrtW.asDiagonal();
  B.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("laplace: factorization of I + W^1/2 C W^1/2 failed");
  return llt.matrixL();
}

}  // namespace

LaplaceState find_latent_map(const Eigen::MatrixXd& C, const LikelihoodData& data,
                             const LaplaceOptions& opts) {
  data.validate();
  const int n = data.size();
  if (C.rows() != n || C.cols() != n)
    throw std::invalid_argument("find_latent_map: covariance size does not match data");

  LaplaceState st;
  st.C = C;
  if (n == 0) {
    st.L.resize(0, 0);
    return st;
  }

  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  double psi = data.loglik_sum(f);
  Eigen::VectorXd grad(n), W(n);
  double grad_norm = std::numeric_limits<double>::infinity();
  int it = 0;

  for (; it < opts.max_iter; ++it) {
    data.grad_hess(f, grad, W);
    grad_norm = (grad - a).lpNorm<Eigen::Infinity>();
    if (grad_norm < opts.tol) break;

    const Eigen::VectorXd sqrtW = W.cwiseSqrt();
    const Eigen::MatrixXd L = chol_B(C, sqrtW);
    const Eigen::VectorXd b = W.cwiseProduct(f) + grad;
    // a_new = b - W^1/2 B^-1 W^1/2 C b
    const Eigen::VectorXd t = sqrtW.cwiseProduct(C * b);
    const Eigen::VectorXd u = L.transpose().triangularView<Eigen::Upper>().solve(
        L.triangularView<Eigen::Lower>().solve(t));
    const Eigen::VectorXd a_new = b - sqrtW.cwiseProduct(u);
    const Eigen::VectorXd f_new = C * a_new;

    // Backtracking on psi(f) = log p(y|f) - f'a/2 along the Newton step.
    const Eigen::VectorXd df = f_new - f;
    const Eigen::VectorXd da = a_new - a;
    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= opts.max_backtrack; ++halving) {
      const Eigen::VectorXd f_try = f + step * df;
      const Eigen::VectorXd a_try = a + step * da;
      const double psi_try = data.loglik_sum(f_try) - 0.5 * f_try.dot(a_try);
      if (psi_try >= psi || !std::isfinite(psi)) {
        f = f_try;
        a = a_try;
        psi = psi_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no ascent possible; treat as stalled
  }

  data.grad_hess(f, grad, W);
  grad_norm = (grad - a).lpNorm<Eigen::Infinity>();
  if (grad_norm >= opts.tol) throw NewtonError(grad_norm, it);

  st.f_hat = f;
  st.a = a;
  st.grad_ll = grad;
  st.W = W;
  st.sqrtW = W.cwiseSqrt();
  st.L = chol_B(C, st.sqrtW);
  st.grad_norm = grad_norm;
  st.iterations = it;
  double log_det_half = 0.0;
  for (int i = 0; i < n; ++i) log_det_half += std::log(st.L(i, i));
  st.log_q = data.loglik_sum(f) - 0.5 * f.dot(a) - log_det_half;
  return st;
}

MarginalGradWork marginal_grad_work(const LaplaceState& st, const LikelihoodData& data) {
  MarginalGradWork work;
  const int n = st.f_hat.size();
  // R = W^1/2 B^-1 W^1/2
  Eigen::MatrixXd V = st.L.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd(st.sqrtW.asDiagonal()));
  work.R = V.transpose() * V;
  // diag of (C^-1 + W)^-1 = diag(C - C R C)
  const Eigen::MatrixXd RC = work.R * st.C;
  work.post_diag = st.C.diagonal() - (st.C.cwiseProduct(RC.transpose())).rowwise().sum();
  work.s2.resize(n);
  for (int i = 0; i < n; ++i) {
    const double d3 = loglik_d3(data.model_of(i), data.y[i], data.z[i], st.f_hat[i]);
    work.s2[i] = 0.5 * work.post_diag[i] * d3;
  }
  return work;
}

double marginal_grad_cov(const LaplaceState& st, const MarginalGradWork& work,
                         const Eigen::MatrixXd& dC) {
  // explicit part
  const double s1 =
      0.5 * st.a.dot(dC * st.a) - 0.5 * (work.R.cwiseProduct(dC)).sum();
  // implicit part through the latent MAP
  const Eigen::VectorXd b = dC * st.grad_ll;
  const Eigen::VectorXd s3 = b - st.C * (work.R * b);
  return s1 + work.s2.dot(s3);
}

double marginal_grad_likparam(const LaplaceState& st, const MarginalGradWork& work,
                              const LikelihoodData& data, int species) {
  const int n = st.f_hat.size();
  double explicit_part = 0.0;
  Eigen::VectorXd dgrad = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (data.species[static_cast<size_t>(i)] != species) continue;
    const ParamDerivs pd =
        loglik_param_derivs(data.model_of(i), data.y[i], data.z[i], st.f_hat[i]);
    explicit_part += pd.dloglik - 0.5 * work.post_diag[i] * pd.dW;
    dgrad[i] = pd.dgrad;
  }
  const Eigen::VectorXd t = st.C * dgrad;
  const Eigen::VectorXd df_hat = t - st.C * (work.R * t);  // (C^-1+W)^-1 dgrad
  return explicit_part + work.s2.dot(df_hat);
}

LatentPredictive predict_latent(const LaplaceState& st, const Eigen::MatrixXd& cross_cov,
                                const Eigen::MatrixXd& test_cov) {
  LatentPredictive out;
  if (st.f_hat.size() == 0) {
    out.mean = Eigen::VectorXd::Zero(cross_cov.rows());
    out.cov = test_cov;
    return out;
  }
  out.mean = cross_cov * st.a;
  const Eigen::MatrixXd V = st.L.triangularView<Eigen::Lower>().solve(
      st.sqrtW.asDiagonal() * cross_cov.transpose());
  out.cov = test_cov - V.transpose() * V;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

void predict_latent_diag(const LaplaceState& st, const Eigen::MatrixXd& cross_cov,
                         const Eigen::VectorXd& test_var, Eigen::VectorXd& mean,
                         Eigen::VectorXd& var) {
  if (st.f_hat.size() == 0) {
    mean = Eigen::VectorXd::Zero(cross_cov.rows());
    var = test_var;
    return;
  }
  mean = cross_cov * st.a;
  const Eigen::MatrixXd V = st.L.triangularView<Eigen::Lower>().solve(
      st.sqrtW.asDiagonal() * cross_cov.transpose());
  var = test_var - V.colwise().squaredNorm().transpose();
}

LatentPredictive conditional_scenario(const Eigen::MatrixXd& C_scenario,
                                      const LikelihoodData& scenario_data,
                                      const Eigen::MatrixXd& cross_cov,
                                      const Eigen::MatrixXd& test_cov,
                                      const LaplaceOptions& opts) {
  const LaplaceState st = find_latent_map(C_scenario, scenario_data, opts);
  return predict_latent(st, cross_cov, test_cov);
}

}  // namespace mvgp
