#include "mvgp/hyperopt.hpp"

#include <cmath>

#include "mvgp/coreg.hpp"
#include "mvgp/rng.hpp"
#include "mvgp/stats.hpp"

namespace mvgp {

double half_student_t_logpdf(double x, double s2, double nu) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return std::log(2.0) + student_t_logpdf(x, nu, std::sqrt(s2));
}

double half_student_t_dlogpdf(double x, double s2, double nu) {
  return student_t_dlogpdf(x, nu, std::sqrt(s2));
}

double half_inv_student_t_logpdf(double x, double s2, double nu) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return half_student_t_logpdf(1.0 / x, s2, nu) - 2.0 * std::log(x);
}

double half_inv_student_t_dlogpdf(double x, double s2, double nu) {
  return -half_student_t_dlogpdf(1.0 / x, s2, nu) / (x * x) - 2.0 / x;
}

PriorEval prior_logpdf_grad(const PriorSpec& spec, const ModelStructure& structure,
                            const Eigen::VectorXd& theta) {
  PriorEval out;
  out.grad = Eigen::VectorXd::Zero(theta.size());
  const ModelParams params = structure.unpack(theta);

  // log-transformed positive parameters: log p(theta) = log p(x) + log x,
  // d/dtheta = x dlogp/dx + 1
  auto add_variance_prior = [&](int k, double x) {
    out.logpdf += half_student_t_logpdf(x, spec.variance_scale2, spec.variance_df) +
                  std::log(x);
    out.grad[k] += x * half_student_t_dlogpdf(x, spec.variance_scale2, spec.variance_df) + 1.0;
  };
  auto add_lengthscale_prior = [&](int k, double x) {
    out.logpdf +=
        half_inv_student_t_logpdf(x, spec.lengthscale_scale2, spec.lengthscale_df) +
        std::log(x);
    out.grad[k] +=
        x * half_inv_student_t_dlogpdf(x, spec.lengthscale_scale2, spec.lengthscale_df) + 1.0;
  };

  for (int k = 0; k < structure.n_params(); ++k) {
    const ModelStructure::Entry& e = structure.schema[static_cast<size_t>(k)];
    switch (e.kind) {
      case ParamKind::LogOffsetVariance:
        add_variance_prior(k, params.sigma0[e.species]);
        break;
      case ParamKind::LogVariance: {
        const TermParams& tp = e.term == ModelStructure::kSpatialTerm
                                   ? params.eps
                                   : params.h[static_cast<size_t>(e.term)];
        add_variance_prior(k, tp.variances[e.index]);
        break;
      }
      case ParamKind::LogLengthscale: {
        const TermStructure& ts = structure.term(e.term);
        const TermParams& tp = e.term == ModelStructure::kSpatialTerm
                                   ? params.eps
                                   : params.h[static_cast<size_t>(e.term)];
        add_lengthscale_prior(
            k, tp.kernels[static_cast<size_t>(ts.active_index(e.species))].lengthscales[e.index]);
        break;
      }
      case ParamKind::LogLikParam: {
        const ObsModel& m = params.obs[static_cast<size_t>(e.species)];
        if (m.kind == ObsKind::Gaussian) {
          add_variance_prior(k, m.noise_variance);
        } else if (!spec.flat_log_overdispersion) {
          add_variance_prior(k, m.overdispersion);
        }
        break;
      }
      case ParamKind::CorrDelta:
        break;  // handled per term below
    }
  }

  // Correlation terms: Eq.-11 density in delta coordinates (Jacobian
  // included), mapped back to the full slots.
  auto add_corr_prior = [&](const TermStructure& ts, const TermParams& tp, int term_id) {
    if (!ts.coupled || ts.n_active() < 2) return;
    const CorrMatrix corr = delta_to_corr(tp.delta, ts.n_active());
    const double v = ts.n_active() + spec.corr_dof_delta;
    const CorrPriorEval pe = corr_prior_logpdf(corr, v);
    out.logpdf += pe.total();
    for (int k = 0; k < structure.n_params(); ++k) {
      const ModelStructure::Entry& e = structure.schema[static_cast<size_t>(k)];
      if (e.kind == ParamKind::CorrDelta && e.term == term_id && !e.inert)
        out.grad[k] += pe.grad_delta[e.index];
    }
  };
  for (size_t t = 0; t < structure.h_terms.size(); ++t)
    add_corr_prior(structure.h_terms[t], params.h[t], static_cast<int>(t));
  if (structure.include_spatial)
    add_corr_prior(structure.eps_term, params.eps, ModelStructure::kSpatialTerm);

  return out;
}

ScgResult scg_minimize(const Objective& objective, const Eigen::VectorXd& start,
                       const ScgOptions& opts) {
  const int dim = static_cast<int>(start.size());
  ScgResult res;
  res.x = start;

  Eigen::VectorXd grad(dim);
  double f = objective(res.x, grad);
  res.n_evals = 1;
  if (!std::isfinite(f))
    throw std::invalid_argument("scg_minimize: objective not finite at the start");

  const double sigma0 = 1e-4;
  double beta = 1.0;
  const double beta_min = 1e-15, beta_max = 1e100;
  Eigen::VectorXd d = -grad;
  bool success = true;
  int n_success = 0;
  double mu = 0.0, kappa = 0.0, theta_curv = 0.0;
  res.trace.push_back(f);

  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    res.grad_inf_norm = grad.lpNorm<Eigen::Infinity>();
    if (res.grad_inf_norm < opts.grad_tol) {
      res.converged = true;
      break;
    }
    if (success) {
      mu = d.dot(grad);
      if (mu >= 0.0) {
        d = -grad;
        mu = d.dot(grad);
      }
      kappa = d.squaredNorm();
      if (kappa < 1e-300) break;
      const double sigma = sigma0 / std::sqrt(kappa);
      Eigen::VectorXd grad_plus(dim);
      const double f_plus = objective(res.x + sigma * d, grad_plus);
      ++res.n_evals;
      if (std::isfinite(f_plus)) {
        theta_curv = d.dot(grad_plus - grad) / sigma;
      } else {
        theta_curv = beta * kappa;  // treat as strongly curved, shrink step
      }
    }

    double delta = theta_curv + beta * kappa;
    if (delta <= 0.0) {
      delta = beta * kappa;
      beta = beta - theta_curv / kappa;
    }
    const double alpha = -mu / delta;

    Eigen::VectorXd grad_new(dim);
    const Eigen::VectorXd x_new = res.x + alpha * d;
    const double f_new = objective(x_new, grad_new);
    ++res.n_evals;

    const double comparison =
        std::isfinite(f_new) ? 2.0 * (f_new - f) / (alpha * mu) : -1.0;
    if (comparison >= 0.0) {
      success = true;
      ++n_success;
      res.x = x_new;
      const Eigen::VectorXd grad_old = grad;
      f = f_new;
      grad = grad_new;
      res.trace.push_back(f);
      if (n_success == dim) {
        d = -grad;
        beta = 1.0;
        n_success = 0;
      } else {
        const double gamma = (grad_old - grad).dot(grad) / mu;
        d = gamma * d - grad;
      }
    } else {
      success = false;
    }
    if (comparison < 0.25) beta = std::min(4.0 * beta, beta_max);
    if (comparison > 0.75) beta = std::max(0.5 * beta, beta_min);
    if (!success && beta >= beta_max) break;  // no progress possible
  }

  res.value = f;
  res.grad_inf_norm = grad.lpNorm<Eigen::Infinity>();
  if (res.grad_inf_norm < opts.grad_tol) res.converged = true;
  return res;
}

ScgResult optimize_map(const Objective& objective, const Eigen::VectorXd& start,
                       const ScgOptions& opts) {
  ScgResult best = scg_minimize(objective, start, opts);
  Rng rng(opts.seed + 0x9e3779b97f4a7c15ull);
  for (int r = 1; r < opts.restarts; ++r) {
    Eigen::VectorXd s = start;
    for (int i = 0; i < s.size(); ++i) s[i] += opts.perturb_scale * rng.normal();
    try {
      const ScgResult cand = scg_minimize(objective, s, opts);
      if ((cand.converged && !best.converged) ||
          (cand.converged == best.converged && cand.value < best.value))
        best = cand;
    } catch (const std::exception&) {
      // infeasible restart point; keep the current best
    }
  }
  return best;
}

}  // namespace mvgp
