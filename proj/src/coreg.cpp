#include "mvgp/coreg.hpp"

#include <cmath>
#include <stdexcept>

#include "mvgp/stats.hpp"

namespace mvgp {

CorrMatrix delta_to_corr(const Eigen::VectorXd& delta, int J) {
  if (delta.size() != corr_n_pairs(J))
    throw std::invalid_argument("delta_to_corr: delta has wrong length");
  CorrMatrix out;
  out.J = J;
  out.delta = delta;
  out.z.resize(delta.size());
  for (int k = 0; k < delta.size(); ++k) out.z[k] = std::tanh(0.5 * delta[k]);

  Eigen::MatrixXd LT = Eigen::MatrixXd::Zero(J, J);
  if (J > 0) LT(0, 0) = 1.0;
  for (int j = 1; j < J; ++j) {
    double prod = 1.0;
    for (int i = 0; i < j; ++i) {
      const double zij = out.z[corr_pair_index(i, j)];
      LT(i, j) = zij * prod;
      prod *= std::sqrt(1.0 - zij * zij);
    }
    LT(j, j) = prod;
  }
  out.L = LT.transpose();
  out.R = out.L * out.L.transpose();
  out.R.diagonal().setOnes();
  out.R = 0.5 * (out.R + out.R.transpose()).eval();
  return out;
}

CorrMatrix corr_to_delta(const Eigen::MatrixXd& R) {
  const int J = static_cast<int>(R.rows());
  if (R.cols() != J) throw std::invalid_argument("corr_to_delta: matrix not square");
  for (int j = 0; j < J; ++j)
    if (std::abs(R(j, j) - 1.0) > 1e-8)
      throw std::domain_error("corr_to_delta: diagonal entries must equal 1");
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("corr_to_delta: matrix is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  CorrMatrix out;
  out.J = J;
  out.R = R;
  out.L = L;
  out.delta.resize(corr_n_pairs(J));
  out.z.resize(corr_n_pairs(J));
  for (int j = 1; j < J; ++j) {
    double prod = 1.0;
    for (int i = 0; i < j; ++i) {
      const double zij = L(j, i) / prod;
      if (!(zij > -1.0 && zij < 1.0))
        throw std::domain_error("corr_to_delta: matrix is not strictly positive definite");
      const int k = corr_pair_index(i, j);
      out.z[k] = zij;
      out.delta[k] = 2.0 * std::atanh(zij);
      prod *= std::sqrt(1.0 - zij * zij);
    }
  }
  return out;
}

CorrPriorEval corr_prior_logpdf(const CorrMatrix& corr, double v) {
  const int J = corr.J;
  if (v <= 0.0) throw std::domain_error("corr_prior_logpdf: v must be positive");
  CorrPriorEval out;
  out.grad_delta = Eigen::VectorXd::Zero(corr.delta.size());
  if (J <= 1) return out;

  Eigen::LLT<Eigen::MatrixXd> llt(corr.R);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("corr_prior_logpdf: singular correlation matrix");
  double logdet = 0.0;
  for (int j = 0; j < J; ++j) logdet += 2.0 * std::log(llt.matrixL()(j, j));
  const Eigen::MatrixXd Rinv =
      llt.solve(Eigen::MatrixXd::Identity(J, J));

  // |R_jj| = |R| * {R^-1}_jj turns the minor determinants of the density
  // into diagonal entries of the inverse.
  const double alpha = 0.5 * (v - 1.0) * (J - 1.0) - 1.0;
  const double norm_const = J * std::lgamma(0.5 * v) - log_multigamma(J, 0.5 * v);
  double sum_log_rinv_diag = 0.0;
  for (int j = 0; j < J; ++j) sum_log_rinv_diag += std::log(Rinv(j, j));
  out.log_density_r =
      norm_const + (alpha - 0.5 * v * J) * logdet - 0.5 * v * sum_log_rinv_diag;

  // Jacobian of delta -> rho with the tanh(delta/2) map.
  out.log_jacobian = 0.0;
  for (int j = 1; j < J; ++j)
    for (int i = 0; i < j; ++i) {
      const double zz = corr.z[corr_pair_index(i, j)];
      out.log_jacobian +=
          (0.5 * (J - i - 2) + 1.0) * std::log1p(-zz * zz) - std::log(2.0);
    }

  // Matrix gradient G with d logpi = tr(G dR) for symmetric perturbations.
  Eigen::MatrixXd G = (alpha - 0.5 * v * J) * Rinv;
  Eigen::VectorXd dinv(J);
  for (int j = 0; j < J; ++j) dinv[j] = 1.0 / Rinv(j, j);
  G += 0.5 * v * Rinv * dinv.asDiagonal() * Rinv;

  const CorrDeltaDerivs derivs = corr_delta_derivs(corr);
  for (int k = 0; k < corr.delta.size(); ++k) {
    const int r = derivs.row[k];
    out.grad_delta[k] = 2.0 * G.row(r).dot(derivs.w[k]);
  }
  for (int j = 1; j < J; ++j)
    for (int i = 0; i < j; ++i) {
      const int k = corr_pair_index(i, j);
      out.grad_delta[k] += -(0.5 * (J - i - 2) + 1.0) * corr.z[k];
    }
  return out;
}

CorrDeltaDerivs corr_delta_derivs(const CorrMatrix& corr) {
  const int J = corr.J;
  CorrDeltaDerivs out;
  const int P = corr_n_pairs(J);
  out.row.resize(static_cast<size_t>(P));
  out.w.resize(static_cast<size_t>(P));
  out.dLrow.resize(static_cast<size_t>(P));
  for (int j = 1; j < J; ++j) {
    // prefix[i] = prod_{i'<i} sqrt(1 - z^2) within column j
    Eigen::VectorXd prefix(j + 1);
    prefix[0] = 1.0;
    for (int i = 0; i < j; ++i) {
      const double zz = corr.z[corr_pair_index(i, j)];
      prefix[i + 1] = prefix[i] * std::sqrt(1.0 - zz * zz);
    }
    for (int i = 0; i < j; ++i) {
      const int k = corr_pair_index(i, j);
      const double zk = corr.z[k];
      // d(row j of L)/dz_k: entry i gets the prefix, later entries scale
      // by -z/(1-z^2) through their sqrt factor.
      Eigen::VectorXd g = Eigen::VectorXd::Zero(J);
      g[i] = prefix[i];
      const double scale = -zk / (1.0 - zk * zk);
      for (int m = i + 1; m < j; ++m) g[m] = corr.L(j, m) * scale;
      g[j] = corr.L(j, j) * scale;
      // dz/ddelta for z = tanh(delta/2)
      g *= 0.5 * (1.0 - zk * zk);
      out.row[static_cast<size_t>(k)] = j;
      out.dLrow[static_cast<size_t>(k)] = g;
      Eigen::VectorXd w = corr.L * g;
      w[j] = 0.0;  // diagonal of R is pinned at 1
      out.w[static_cast<size_t>(k)] = w;
    }
  }
  return out;
}

Eigen::MatrixXd CoregTerm::chol() const {
  const int m = n_active();
  Eigen::MatrixXd L;
  if (coupled) {
    L = corr.L;
  } else {
    L = Eigen::MatrixXd::Identity(m, m);
  }
  for (int j = 0; j < m; ++j) L.row(j) *= std::sqrt(variances[j]);
  return L;
}

Eigen::MatrixXd CoregTerm::sigma() const {
  const Eigen::MatrixXd L = chol();
  return L * L.transpose();
}

BlockLayout BlockLayout::from_points(std::vector<Eigen::MatrixXd> pts) {
  BlockLayout out;
  out.points = std::move(pts);
  out.offsets.resize(out.points.size());
  out.sizes.resize(out.points.size());
  int at = 0;
  for (size_t j = 0; j < out.points.size(); ++j) {
    out.offsets[j] = at;
    out.sizes[j] = static_cast<int>(out.points[j].rows());
    at += out.sizes[j];
  }
  out.total = at;
  return out;
}

namespace {

void check_term(const CoregTerm& term, const TermKernels& kernels, int n_species) {
  if (term.variances.size() != term.n_active())
    throw std::invalid_argument("coreg term: variance count mismatch");
  if (kernels.params.size() != static_cast<size_t>(term.n_active()))
    throw std::invalid_argument("coreg term: kernel parameter count mismatch");
  if (term.coupled && term.corr.J != term.n_active())
    throw std::invalid_argument("coreg term: correlation size mismatch");
  for (int s : term.active)
    if (s < 0 || s >= n_species)
      throw std::invalid_argument("coreg term: species index out of range");
}

/// Adds sum_l u_l(j,j') Ktilde_l blocks over the active species of a term.
void add_lmc_term(Eigen::MatrixXd& C, const CoregTerm& term, const TermKernels& kernels,
                  const BlockLayout& layout) {
  const int m = term.n_active();
  const Eigen::MatrixXd L = term.chol();
  for (int l = 0; l < m; ++l) {
    const KernelParams& kp = kernels.params[static_cast<size_t>(l)];
    for (int a = 0; a < m; ++a) {
      const int ja = term.active[static_cast<size_t>(a)];
      for (int b = 0; b <= a; ++b) {
        const int jb = term.active[static_cast<size_t>(b)];
        const double u = L(a, l) * L(b, l);
        if (u == 0.0) continue;
        const Eigen::MatrixXd K =
            eval_kernel(kernels.spec, kp, layout.points[static_cast<size_t>(ja)],
                        layout.points[static_cast<size_t>(jb)]);
        C.block(layout.offsets[static_cast<size_t>(ja)], layout.offsets[static_cast<size_t>(jb)],
                layout.sizes[static_cast<size_t>(ja)], layout.sizes[static_cast<size_t>(jb)]) +=
            u * K;
        if (a != b)
          C.block(layout.offsets[static_cast<size_t>(jb)], layout.offsets[static_cast<size_t>(ja)],
                  layout.sizes[static_cast<size_t>(jb)], layout.sizes[static_cast<size_t>(ja)]) +=
              u * K.transpose();
      }
    }
  }
}

/// Row-block version for cross covariances: target species at test points
/// against all training columns of the term.
void add_lmc_cross(Eigen::MatrixXd& C, const CoregTerm& term, const TermKernels& kernels,
                   const Eigen::MatrixXd& test_points, int species,
                   const BlockLayout& layout) {
  const int m = term.n_active();
  int a = -1;
  for (int i = 0; i < m; ++i)
    if (term.active[static_cast<size_t>(i)] == species) a = i;
  if (a < 0) return;  // species does not carry this term
  const Eigen::MatrixXd L = term.chol();
  for (int l = 0; l < m; ++l) {
    const KernelParams& kp = kernels.params[static_cast<size_t>(l)];
    for (int b = 0; b < m; ++b) {
      const int jb = term.active[static_cast<size_t>(b)];
      const double u = L(a, l) * L(b, l);
      if (u == 0.0) continue;
      C.block(0, layout.offsets[static_cast<size_t>(jb)], test_points.rows(),
              layout.sizes[static_cast<size_t>(jb)]) +=
          u * eval_kernel(kernels.spec, kp, test_points,
                          layout.points[static_cast<size_t>(jb)]);
    }
  }
}

void add_lmc_test(Eigen::MatrixXd& C, const CoregTerm& term, const TermKernels& kernels,
                  const Eigen::MatrixXd& test_points, int species) {
  const int m = term.n_active();
  int a = -1;
  for (int i = 0; i < m; ++i)
    if (term.active[static_cast<size_t>(i)] == species) a = i;
  if (a < 0) return;
  const Eigen::MatrixXd L = term.chol();
  for (int l = 0; l < m; ++l) {
    const double u = L(a, l) * L(a, l);
    if (u == 0.0) continue;
    C += u * eval_kernel(kernels.spec, kernels.params[static_cast<size_t>(l)], test_points,
                         test_points);
  }
}

}  // namespace

Eigen::MatrixXd assemble_lmc_cov(const CoregSet& coreg,
                                 const std::vector<TermKernels>& h_kernels,
                                 const TermKernels& eps_kernels, const BlockLayout& layout,
                                 std::uint64_t size_cap_bytes) {
  const int J = layout.n_species();
  const std::uint64_t n = static_cast<std::uint64_t>(layout.total);
  if (n * n * sizeof(double) > size_cap_bytes)
    throw std::runtime_error(
        "assemble_lmc_cov: requested covariance of " + std::to_string(n) + "x" +
        std::to_string(n) + " doubles exceeds the size cap; raise the cap to proceed");
  if (coreg.sigma0.size() != J)
    throw std::invalid_argument("assemble_lmc_cov: sigma0 size mismatch");
  if (coreg.sigma_h.size() != h_kernels.size())
    throw std::invalid_argument("assemble_lmc_cov: covariate term count mismatch");

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(layout.total, layout.total);
  for (int j = 0; j < J; ++j)
    C.block(layout.offsets[static_cast<size_t>(j)], layout.offsets[static_cast<size_t>(j)],
            layout.sizes[static_cast<size_t>(j)], layout.sizes[static_cast<size_t>(j)])
        .array() += coreg.sigma0[j];
  for (size_t r = 0; r < coreg.sigma_h.size(); ++r) {
    check_term(coreg.sigma_h[r], h_kernels[r], J);
    add_lmc_term(C, coreg.sigma_h[r], h_kernels[r], layout);
  }
  if (coreg.include_spatial) {
    check_term(coreg.sigma_eps, eps_kernels, J);
    add_lmc_term(C, coreg.sigma_eps, eps_kernels, layout);
  }
  return C;
}

Eigen::MatrixXd assemble_cross_cov(const CoregSet& coreg,
                                   const std::vector<TermKernels>& h_kernels,
                                   const TermKernels& eps_kernels,
                                   const Eigen::MatrixXd& test_points, int species,
                                   const BlockLayout& layout, const TargetSpec& target) {
  const int J = layout.n_species();
  if (species < 0 || species >= J)
    throw std::domain_error("assemble_cross_cov: species index out of range");
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(test_points.rows(), layout.total);
  switch (target.kind) {
    case PredictTarget::Full: {
      C.block(0, layout.offsets[static_cast<size_t>(species)], test_points.rows(),
              layout.sizes[static_cast<size_t>(species)])
          .array() += coreg.sigma0[species];
      for (size_t r = 0; r < coreg.sigma_h.size(); ++r)
        add_lmc_cross(C, coreg.sigma_h[r], h_kernels[r], test_points, species, layout);
      if (coreg.include_spatial)
        add_lmc_cross(C, coreg.sigma_eps, eps_kernels, test_points, species, layout);
      break;
    }
    case PredictTarget::Covariate: {
      if (target.covariate < 0 || target.covariate >= static_cast<int>(coreg.sigma_h.size()))
        throw std::domain_error("assemble_cross_cov: unknown covariate index");
      add_lmc_cross(C, coreg.sigma_h[static_cast<size_t>(target.covariate)],
                    h_kernels[static_cast<size_t>(target.covariate)], test_points, species,
                    layout);
      break;
    }
    case PredictTarget::Spatial: {
      if (!coreg.include_spatial)
        throw std::domain_error("assemble_cross_cov: model has no spatial term");
      add_lmc_cross(C, coreg.sigma_eps, eps_kernels, test_points, species, layout);
      break;
    }
    case PredictTarget::Offset: {
      C.block(0, layout.offsets[static_cast<size_t>(species)], test_points.rows(),
              layout.sizes[static_cast<size_t>(species)])
          .array() += coreg.sigma0[species];
      break;
    }
  }
  return C;
}

Eigen::MatrixXd assemble_test_cov(const CoregSet& coreg,
                                  const std::vector<TermKernels>& h_kernels,
                                  const TermKernels& eps_kernels,
                                  const Eigen::MatrixXd& test_points, int species,
                                  const TargetSpec& target) {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(test_points.rows(), test_points.rows());
  switch (target.kind) {
    case PredictTarget::Full: {
      C.array() += coreg.sigma0[species];
      for (size_t r = 0; r < coreg.sigma_h.size(); ++r)
        add_lmc_test(C, coreg.sigma_h[r], h_kernels[r], test_points, species);
      if (coreg.include_spatial)
        add_lmc_test(C, coreg.sigma_eps, eps_kernels, test_points, species);
      break;
    }
    case PredictTarget::Covariate: {
      if (target.covariate < 0 || target.covariate >= static_cast<int>(coreg.sigma_h.size()))
        throw std::domain_error("assemble_test_cov: unknown covariate index");
      add_lmc_test(C, coreg.sigma_h[static_cast<size_t>(target.covariate)],
                   h_kernels[static_cast<size_t>(target.covariate)], test_points, species);
      break;
    }
    case PredictTarget::Spatial: {
      if (!coreg.include_spatial)
        throw std::domain_error("assemble_test_cov: model has no spatial term");
      add_lmc_test(C, coreg.sigma_eps, eps_kernels, test_points, species);
      break;
    }
    case PredictTarget::Offset:
      C.array() += coreg.sigma0[species];
      break;
  }
  return C;
}

}  // namespace mvgp
