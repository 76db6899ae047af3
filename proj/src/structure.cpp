#include "mvgp/structure.hpp"

#include <cmath>
#include <stdexcept>

namespace mvgp {

int TermStructure::active_index(int species) const {
  for (size_t i = 0; i < active.size(); ++i)
    if (active[i] == species) return static_cast<int>(i);
  return -1;
}

namespace {

void push_term_entries(const TermStructure& ts, int term_id, int n_species,
                       std::vector<ModelStructure::Entry>& schema) {
  const int n_ls = ts.spec.n_lengthscales();
  for (int a = 0; a < ts.n_active(); ++a) {
    const int j = ts.active[static_cast<size_t>(a)];
    for (int d = 0; d < n_ls; ++d) {
      schema.push_back({ParamKind::LogLengthscale, term_id, j, d, false,
                        ts.name + ".lengthscale[" + std::to_string(j) + "," +
                            std::to_string(d) + "]"});
    }
  }
  for (int a = 0; a < ts.n_active(); ++a) {
    const int j = ts.active[static_cast<size_t>(a)];
    schema.push_back({ParamKind::LogVariance, term_id, j, a, false,
                      ts.name + ".variance[" + std::to_string(j) + "]"});
  }
  if (ts.coupled) {
    for (int jj = 1; jj < n_species; ++jj)
      for (int ii = 0; ii < jj; ++ii) {
        const int ai = ts.active_index(ii);
        const int aj = ts.active_index(jj);
        const bool inert = (ai < 0 || aj < 0);
        const int subset_pair = inert ? -1 : corr_pair_index(ai, aj);
        schema.push_back({ParamKind::CorrDelta, term_id, -1, subset_pair, inert,
                          ts.name + ".delta[" + std::to_string(ii) + "," +
                              std::to_string(jj) + "]"});
      }
  }
}

}  // namespace

void ModelStructure::finalize() {
  schema.clear();
  for (int j = 0; j < n_species; ++j)
    schema.push_back({ParamKind::LogOffsetVariance, -1, j, -1, false,
                      "offset.variance[" + std::to_string(j) + "]"});
  for (size_t t = 0; t < h_terms.size(); ++t)
    push_term_entries(h_terms[t], static_cast<int>(t), n_species, schema);
  if (include_spatial) push_term_entries(eps_term, kSpatialTerm, n_species, schema);
  for (int j = 0; j < n_species; ++j) {
    if (!obs_init[static_cast<size_t>(j)].has_param()) continue;
    const char* label =
        obs_init[static_cast<size_t>(j)].kind == ObsKind::NegBin ? "log_r" : "log_noise";
    schema.push_back({ParamKind::LogLikParam, -1, j, -1, false,
                      std::string(label) + "[" + std::to_string(j) + "]"});
  }
}

namespace {

TermParams make_term_params(const TermStructure& ts) {
  TermParams tp;
  tp.kernels.resize(static_cast<size_t>(ts.n_active()));
  for (auto& kp : tp.kernels) {
    kp.lengthscales = Eigen::VectorXd::Ones(ts.spec.n_lengthscales());
    kp.variance = 1.0;
  }
  tp.variances = Eigen::VectorXd::Ones(ts.n_active());
  if (ts.coupled) tp.delta = Eigen::VectorXd::Zero(corr_n_pairs(ts.n_active()));
  return tp;
}

}  // namespace

Eigen::VectorXd ModelStructure::pack(const ModelParams& p) const {
  Eigen::VectorXd theta(n_params());
  for (int k = 0; k < n_params(); ++k) {
    const Entry& e = schema[static_cast<size_t>(k)];
    switch (e.kind) {
      case ParamKind::LogOffsetVariance:
        theta[k] = std::log(p.sigma0[e.species]);
        break;
      case ParamKind::LogLengthscale: {
        const TermStructure& ts = term(e.term);
        const TermParams& tp =
            e.term == kSpatialTerm ? p.eps : p.h[static_cast<size_t>(e.term)];
        theta[k] = std::log(
            tp.kernels[static_cast<size_t>(ts.active_index(e.species))].lengthscales[e.index]);
        break;
      }
      case ParamKind::LogVariance: {
        const TermParams& tp =
            e.term == kSpatialTerm ? p.eps : p.h[static_cast<size_t>(e.term)];
        theta[k] = std::log(tp.variances[e.index]);
        break;
      }
      case ParamKind::CorrDelta: {
        const TermParams& tp =
            e.term == kSpatialTerm ? p.eps : p.h[static_cast<size_t>(e.term)];
        theta[k] = e.inert ? 0.0 : tp.delta[e.index];
        break;
      }
      case ParamKind::LogLikParam:
        theta[k] = std::log(p.obs[static_cast<size_t>(e.species)].param());
        break;
    }
  }
  return theta;
}

ModelParams ModelStructure::unpack(const Eigen::VectorXd& theta) const {
  if (theta.size() != n_params())
    throw std::invalid_argument("unpack: parameter vector has wrong length");
  ModelParams p;
  p.sigma0 = Eigen::VectorXd::Ones(n_species);
  p.obs = obs_init;
  for (const auto& ts : h_terms) p.h.push_back(make_term_params(ts));
  if (include_spatial) p.eps = make_term_params(eps_term);

  for (int k = 0; k < n_params(); ++k) {
    const Entry& e = schema[static_cast<size_t>(k)];
    switch (e.kind) {
      case ParamKind::LogOffsetVariance:
        p.sigma0[e.species] = std::exp(theta[k]);
        break;
      case ParamKind::LogLengthscale: {
        const TermStructure& ts = term(e.term);
        TermParams& tp = e.term == kSpatialTerm ? p.eps : p.h[static_cast<size_t>(e.term)];
        tp.kernels[static_cast<size_t>(ts.active_index(e.species))].lengthscales[e.index] =
            std::exp(theta[k]);
        break;
      }
      case ParamKind::LogVariance: {
        TermParams& tp = e.term == kSpatialTerm ? p.eps : p.h[static_cast<size_t>(e.term)];
        tp.variances[e.index] = std::exp(theta[k]);
        break;
      }
      case ParamKind::CorrDelta: {
        if (e.inert) break;
        TermParams& tp = e.term == kSpatialTerm ? p.eps : p.h[static_cast<size_t>(e.term)];
        tp.delta[e.index] = theta[k];
        break;
      }
      case ParamKind::LogLikParam:
        p.obs[static_cast<size_t>(e.species)].set_param(std::exp(theta[k]));
        break;
    }
  }
  return p;
}

Eigen::VectorXd ModelStructure::default_start() const {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n_params());
  for (int k = 0; k < n_params(); ++k) {
    const Entry& e = schema[static_cast<size_t>(k)];
    if (e.kind == ParamKind::LogLikParam)
      theta[k] = std::log(obs_init[static_cast<size_t>(e.species)].param());
  }
  return theta;
}

CovarianceModel::CovarianceModel(const ModelStructure& structure, const BlockLayout& layout,
                                 const ModelParams& params, std::uint64_t size_cap_bytes)
    : structure_(structure), layout_(layout), params_(params) {
  const std::uint64_t n = static_cast<std::uint64_t>(layout.total);
  if (n * n * sizeof(double) > size_cap_bytes)
    throw std::runtime_error("covariance model: size cap exceeded for n = " +
                             std::to_string(n));
  h_work_.resize(structure.h_terms.size());
  for (size_t t = 0; t < structure.h_terms.size(); ++t)
    build_term_work(structure.h_terms[t], params_.h[t], h_work_[t]);
  if (structure.include_spatial)
    build_term_work(structure.eps_term, params_.eps, eps_work_);

  C_ = Eigen::MatrixXd::Zero(layout.total, layout.total);
  for (int j = 0; j < structure.n_species; ++j)
    C_.block(layout.offsets[static_cast<size_t>(j)], layout.offsets[static_cast<size_t>(j)],
             layout.sizes[static_cast<size_t>(j)], layout.sizes[static_cast<size_t>(j)])
        .array() += params_.sigma0[j];
  for (const auto& work : h_work_) add_term(work, C_);
  if (structure.include_spatial) add_term(eps_work_, C_);
}

void CovarianceModel::build_term_work(const TermStructure& ts, const TermParams& tp,
                                      TermWork& work) const {
  work.ts = &ts;
  work.tp = &tp;
  std::vector<Eigen::MatrixXd> pts;
  pts.reserve(ts.active.size());
  for (int j : ts.active) pts.push_back(layout_.points[static_cast<size_t>(j)]);
  work.sub = BlockLayout::from_points(std::move(pts));

  Eigen::MatrixXd Xact(work.sub.total, layout_.points[0].cols());
  for (int a = 0; a < ts.n_active(); ++a)
    Xact.middleRows(work.sub.offsets[static_cast<size_t>(a)],
                    work.sub.sizes[static_cast<size_t>(a)]) =
        work.sub.points[static_cast<size_t>(a)];

  const int m = ts.n_active();
  work.K.resize(static_cast<size_t>(m));
  work.dK.resize(static_cast<size_t>(m));
  for (int l = 0; l < m; ++l) {
    work.K[static_cast<size_t>(l)] = eval_kernel(ts.spec, tp.kernels[static_cast<size_t>(l)], Xact, Xact);
    work.dK[static_cast<size_t>(l)] =
        kernel_param_grads(ts.spec, tp.kernels[static_cast<size_t>(l)], Xact, Xact);
  }

  if (ts.coupled) {
    work.corr = delta_to_corr(tp.delta, m);
    work.corr_derivs = corr_delta_derivs(work.corr);
    work.Lsig = work.corr.L;
  } else {
    work.Lsig = Eigen::MatrixXd::Identity(m, m);
  }
  for (int a = 0; a < m; ++a) work.Lsig.row(a) *= std::sqrt(tp.variances[a]);
}

void CovarianceModel::add_term(const TermWork& work, Eigen::MatrixXd& C) const {
  const int m = work.ts->n_active();
  for (int l = 0; l < m; ++l) {
    for (int a = 0; a < m; ++a) {
      const int ga = work.ts->active[static_cast<size_t>(a)];
      for (int b = 0; b < m; ++b) {
        const double u = work.Lsig(a, l) * work.Lsig(b, l);
        if (u == 0.0) continue;
        const int gb = work.ts->active[static_cast<size_t>(b)];
        C.block(layout_.offsets[static_cast<size_t>(ga)], layout_.offsets[static_cast<size_t>(gb)],
                layout_.sizes[static_cast<size_t>(ga)], layout_.sizes[static_cast<size_t>(gb)]) +=
            u * work.K[static_cast<size_t>(l)].block(
                    work.sub.offsets[static_cast<size_t>(a)], work.sub.offsets[static_cast<size_t>(b)],
                    work.sub.sizes[static_cast<size_t>(a)], work.sub.sizes[static_cast<size_t>(b)]);
      }
    }
  }
}

Eigen::MatrixXd CovarianceModel::grad_lengthscale(const TermWork& work, int latent,
                                                  int dim) const {
  Eigen::MatrixXd dC = Eigen::MatrixXd::Zero(layout_.total, layout_.total);
  const int m = work.ts->n_active();
  const Eigen::MatrixXd& dK = work.dK[static_cast<size_t>(latent)][static_cast<size_t>(dim)];
  for (int a = 0; a < m; ++a) {
    const int ga = work.ts->active[static_cast<size_t>(a)];
    for (int b = 0; b < m; ++b) {
      const double u = work.Lsig(a, latent) * work.Lsig(b, latent);
      if (u == 0.0) continue;
      const int gb = work.ts->active[static_cast<size_t>(b)];
      dC.block(layout_.offsets[static_cast<size_t>(ga)], layout_.offsets[static_cast<size_t>(gb)],
               layout_.sizes[static_cast<size_t>(ga)], layout_.sizes[static_cast<size_t>(gb)]) +=
          u * dK.block(work.sub.offsets[static_cast<size_t>(a)],
                       work.sub.offsets[static_cast<size_t>(b)],
                       work.sub.sizes[static_cast<size_t>(a)],
                       work.sub.sizes[static_cast<size_t>(b)]);
    }
  }
  return dC;
}

Eigen::MatrixXd CovarianceModel::grad_variance(const TermWork& work, int latent) const {
  // d Sigma / d log sigma2_l scales row/column l of the term by 1/2 each,
  // leaving the (l,l) block with the full contribution.
  Eigen::MatrixXd dC = Eigen::MatrixXd::Zero(layout_.total, layout_.total);
  const int m = work.ts->n_active();
  const int gl = work.ts->active[static_cast<size_t>(latent)];
  for (int b = 0; b < m; ++b) {
    const int gb = work.ts->active[static_cast<size_t>(b)];
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(work.sub.sizes[static_cast<size_t>(latent)],
                                                work.sub.sizes[static_cast<size_t>(b)]);
    for (int l = 0; l < m; ++l) {
      const double u = work.Lsig(latent, l) * work.Lsig(b, l);
      if (u == 0.0) continue;
      blk += u * work.K[static_cast<size_t>(l)].block(
                     work.sub.offsets[static_cast<size_t>(latent)],
                     work.sub.offsets[static_cast<size_t>(b)],
                     work.sub.sizes[static_cast<size_t>(latent)],
                     work.sub.sizes[static_cast<size_t>(b)]);
    }
    blk *= 0.5;
    dC.block(layout_.offsets[static_cast<size_t>(gl)], layout_.offsets[static_cast<size_t>(gb)],
             blk.rows(), blk.cols()) += blk;
    dC.block(layout_.offsets[static_cast<size_t>(gb)], layout_.offsets[static_cast<size_t>(gl)],
             blk.cols(), blk.rows()) += blk.transpose();
  }
  return dC;
}

Eigen::MatrixXd CovarianceModel::grad_delta(const TermWork& work, int pair) const {
  Eigen::MatrixXd dC = Eigen::MatrixXd::Zero(layout_.total, layout_.total);
  const int m = work.ts->n_active();
  const int j0 = work.corr_derivs.row[static_cast<size_t>(pair)];
  const Eigen::VectorXd& g = work.corr_derivs.dLrow[static_cast<size_t>(pair)];
  const double sig_j0 = std::sqrt(work.tp->variances[j0]);
  const int gj0 = work.ts->active[static_cast<size_t>(j0)];
  for (int b = 0; b < m; ++b) {
    const int gb = work.ts->active[static_cast<size_t>(b)];
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(work.sub.sizes[static_cast<size_t>(j0)],
                                                work.sub.sizes[static_cast<size_t>(b)]);
    for (int l = 0; l < m; ++l) {
      const double v = sig_j0 * g[l] * work.Lsig(b, l);
      if (v == 0.0) continue;
      blk += v * work.K[static_cast<size_t>(l)].block(
                     work.sub.offsets[static_cast<size_t>(j0)],
                     work.sub.offsets[static_cast<size_t>(b)],
                     work.sub.sizes[static_cast<size_t>(j0)],
                     work.sub.sizes[static_cast<size_t>(b)]);
    }
    dC.block(layout_.offsets[static_cast<size_t>(gj0)], layout_.offsets[static_cast<size_t>(gb)],
             blk.rows(), blk.cols()) += blk;
    dC.block(layout_.offsets[static_cast<size_t>(gb)], layout_.offsets[static_cast<size_t>(gj0)],
             blk.cols(), blk.rows()) += blk.transpose();
  }
  return dC;
}

void CovarianceModel::for_each_cov_grad(
    const std::function<void(int, const Eigen::MatrixXd&)>& fn) const {
  for (int k = 0; k < structure_.n_params(); ++k) {
    const ModelStructure::Entry& e = structure_.schema[static_cast<size_t>(k)];
    const TermWork* work = nullptr;
    if (e.term == ModelStructure::kSpatialTerm) work = &eps_work_;
    else if (e.term >= 0) work = &h_work_[static_cast<size_t>(e.term)];
    switch (e.kind) {
      case ParamKind::LogOffsetVariance: {
        Eigen::MatrixXd dC = Eigen::MatrixXd::Zero(layout_.total, layout_.total);
        dC.block(layout_.offsets[static_cast<size_t>(e.species)],
                 layout_.offsets[static_cast<size_t>(e.species)],
                 layout_.sizes[static_cast<size_t>(e.species)],
                 layout_.sizes[static_cast<size_t>(e.species)])
            .array() += params_.sigma0[e.species];
        fn(k, dC);
        break;
      }
      case ParamKind::LogLengthscale:
        fn(k, grad_lengthscale(*work, work->ts->active_index(e.species), e.index));
        break;
      case ParamKind::LogVariance:
        fn(k, grad_variance(*work, e.index));
        break;
      case ParamKind::CorrDelta:
        if (!e.inert) fn(k, grad_delta(*work, e.index));
        break;
      case ParamKind::LogLikParam:
        break;
    }
  }
}

CoregSet CovarianceModel::coreg() const {
  CoregSet out;
  out.sigma0 = params_.sigma0;
  out.include_spatial = structure_.include_spatial;
  for (size_t t = 0; t < structure_.h_terms.size(); ++t) {
    const TermStructure& ts = structure_.h_terms[t];
    CoregTerm term;
    term.active = ts.active;
    term.variances = params_.h[t].variances;
    term.coupled = ts.coupled;
    if (ts.coupled) term.corr = delta_to_corr(params_.h[t].delta, ts.n_active());
    out.sigma_h.push_back(std::move(term));
  }
  if (structure_.include_spatial) {
    out.sigma_eps.active = structure_.eps_term.active;
    out.sigma_eps.variances = params_.eps.variances;
    out.sigma_eps.coupled = structure_.eps_term.coupled;
    if (out.sigma_eps.coupled)
      out.sigma_eps.corr = delta_to_corr(params_.eps.delta, structure_.eps_term.n_active());
  }
  return out;
}

std::vector<TermKernels> CovarianceModel::h_kernels() const {
  std::vector<TermKernels> out;
  for (size_t t = 0; t < structure_.h_terms.size(); ++t)
    out.push_back({structure_.h_terms[t].spec, params_.h[t].kernels});
  return out;
}

TermKernels CovarianceModel::eps_kernels() const {
  if (!structure_.include_spatial) return {};
  return {structure_.eps_term.spec, params_.eps.kernels};
}

}  // namespace mvgp
