#ifndef MVGP_STRUCTURE_HPP
#define MVGP_STRUCTURE_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "mvgp/coreg.hpp"
#include "mvgp/kernels.hpp"
#include "mvgp/likelihoods.hpp"

namespace mvgp {

enum class ParamKind {
  LogOffsetVariance,
  LogLengthscale,
  LogVariance,
  CorrDelta,
  LogLikParam,
};

/// One additive term of the prior: a correlation-form kernel plus a
/// coregionalization matrix over the species that carry the term.
struct TermStructure {
  std::string name;
  KernelSpec spec;          // is_correlation = true
  std::vector<int> active;  // ascending species ids
  bool coupled = false;

  int n_active() const { return static_cast<int>(active.size()); }
  int active_index(int species) const;  // -1 when absent
};

struct TermParams {
  std::vector<KernelParams> kernels;  // per active species
  Eigen::VectorXd variances;          // per active species
  Eigen::VectorXd delta;              // subset pairs, coupled terms only
};

struct ModelParams {
  Eigen::VectorXd sigma0;      // offset variances, per species
  std::vector<TermParams> h;   // per covariate term
  TermParams eps;              // spatial term
  std::vector<ObsModel> obs;   // per species, with current likelihood params
};

/// Declarative model structure bound to a species set; owns the packed
/// parameter schema. Correlation deltas are packed as full J(J-1)/2 slots
/// per coupled term; slots whose pair involves a species outside the term's
/// active set are inert (unpacked to nothing, gradient exactly zero).
struct ModelStructure {
  static constexpr int kSpatialTerm = -2;

  int n_species = 0;
  std::vector<ObsModel> obs_init;
  std::vector<TermStructure> h_terms;
  TermStructure eps_term;
  bool include_spatial = false;
  int corr_dof_delta = 1;  // prior dof v = n_active + corr_dof_delta

  struct Entry {
    ParamKind kind;
    int term = -1;     // h-term index, kSpatialTerm, or -1
    int species = -1;  // owning species (global id) where applicable
    int index = -1;    // length-scale dim, or subset pair index (-1 = inert)
    bool inert = false;
    std::string name;
  };
  std::vector<Entry> schema;

  void finalize();  // builds the schema; call after filling the fields
  int n_params() const { return static_cast<int>(schema.size()); }

  Eigen::VectorXd pack(const ModelParams& params) const;
  ModelParams unpack(const Eigen::VectorXd& theta) const;

  /// Unit length-scales/variances (0 in log coordinates), identity
  /// correlations, likelihood params from obs_init.
  Eigen::VectorXd default_start() const;

  const TermStructure& term(int id) const {
    return id == kSpatialTerm ? eps_term : h_terms[static_cast<size_t>(id)];
  }
};

/// Prior covariance and its analytic parameter gradients at one parameter
/// point, with per-latent kernel matrices cached for reuse.
class CovarianceModel {
 public:
  CovarianceModel(const ModelStructure& structure, const BlockLayout& layout,
                  const ModelParams& params, std::uint64_t size_cap_bytes = (1ull << 31));

  const Eigen::MatrixXd& C() const { return C_; }

  /// Invokes fn(schema_index, dC) for every covariance coordinate (all
  /// kinds except LogLikParam); inert delta slots are skipped.
  void for_each_cov_grad(const std::function<void(int, const Eigen::MatrixXd&)>& fn) const;

  /// Bridges to the spec-level assemblers for prediction.
  CoregSet coreg() const;
  std::vector<TermKernels> h_kernels() const;
  TermKernels eps_kernels() const;

 private:
  struct TermWork {
    const TermStructure* ts = nullptr;
    const TermParams* tp = nullptr;
    BlockLayout sub;                            // layout over active species
    std::vector<Eigen::MatrixXd> K;             // per latent
    std::vector<std::vector<Eigen::MatrixXd>> dK;  // per latent, per length-scale
    Eigen::MatrixXd Lsig;                       // chol of Sigma over active
    CorrMatrix corr;
    CorrDeltaDerivs corr_derivs;
  };

  void build_term_work(const TermStructure& ts, const TermParams& tp, TermWork& work) const;
  void add_term(const TermWork& work, Eigen::MatrixXd& C) const;
  Eigen::MatrixXd grad_lengthscale(const TermWork& work, int latent, int dim) const;
  Eigen::MatrixXd grad_variance(const TermWork& work, int latent) const;
  Eigen::MatrixXd grad_delta(const TermWork& work, int pair) const;

  const ModelStructure& structure_;
  const BlockLayout& layout_;
  ModelParams params_;
  std::vector<TermWork> h_work_;
  TermWork eps_work_;
  Eigen::MatrixXd C_;
};

}  // namespace mvgp

#endif
