#ifndef MVGP_COREG_HPP
#define MVGP_COREG_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mvgp/kernels.hpp"

namespace mvgp {

/// Unconstrained coordinate index of the pair (i, j), i < j, both 0-based.
/// Pairs are packed column-major over the strict upper triangle, matching
/// the column-wise Cholesky construction.
inline int corr_pair_index(int i, int j) { return j * (j - 1) / 2 + i; }
inline int corr_n_pairs(int J) { return J * (J - 1) / 2; }

/// Correlation matrix with its Cholesky factor and the unconstrained
/// parameterization: z = tanh(delta/2) entrywise, L^T built column-wise so
/// every z in (-1,1) yields a valid correlation matrix.
struct CorrMatrix {
  int J = 0;
  Eigen::MatrixXd R;      // J x J, unit diagonal
  Eigen::MatrixXd L;      // lower Cholesky factor of R
  Eigen::VectorXd delta;  // J(J-1)/2 unconstrained coordinates
  Eigen::VectorXd z;      // intermediates in (-1,1), same packing
};

/// Total map: any finite delta gives a valid correlation matrix.
CorrMatrix delta_to_corr(const Eigen::VectorXd& delta, int J);

/// Exact inverse of delta_to_corr. R must be strictly positive definite
/// with unit diagonal.
CorrMatrix corr_to_delta(const Eigen::MatrixXd& R);

/// Marginally uniform prior over correlation matrices (degrees v) together
/// with the log |Jacobian| of the delta -> R change of variables and the
/// gradient of their sum in delta coordinates.
struct CorrPriorEval {
  double log_density_r = 0.0;  // normalized density of R
  double log_jacobian = 0.0;   // delta -> rho change of variables
  Eigen::VectorXd grad_delta;  // d(log_density_r + log_jacobian)/d delta
  double total() const { return log_density_r + log_jacobian; }
};
CorrPriorEval corr_prior_logpdf(const CorrMatrix& corr, double v);

/// Per-coordinate structure of dR/ddelta_k: only row/column `row[k]` of R
/// moves, dR = e_r w^T + w e_r^T. dLrow[k] holds d(L.row(row[k]))/ddelta_k.
struct CorrDeltaDerivs {
  std::vector<int> row;
  std::vector<Eigen::VectorXd> w;
  std::vector<Eigen::VectorXd> dLrow;
};
CorrDeltaDerivs corr_delta_derivs(const CorrMatrix& corr);

/// One coregionalization matrix Sigma = D^{1/2} R D^{1/2} restricted to the
/// species that carry the term; other species' rows/columns are
/// structurally zero.
struct CoregTerm {
  std::vector<int> active;    // species ids, ascending
  Eigen::VectorXd variances;  // per active species
  CorrMatrix corr;            // over the active subset
  bool coupled = false;       // identity correlation when false

  int n_active() const { return static_cast<int>(active.size()); }
  /// Cholesky factor of Sigma over the active subset: D^{1/2} L.
  Eigen::MatrixXd chol() const;
  Eigen::MatrixXd sigma() const;
};

/// Correlation-form kernel of one term: shared family/dims, per-latent
/// (= per active species) parameters.
struct TermKernels {
  KernelSpec spec;
  std::vector<KernelParams> params;  // indexed like CoregTerm::active
};

/// All interspecific covariance structure of a model.
struct CoregSet {
  Eigen::VectorXd sigma0;          // offset variances, one per species
  std::vector<CoregTerm> sigma_h;  // one per covariate term
  CoregTerm sigma_eps;             // spatial term
  bool include_spatial = false;
};

/// Species-major stacking of the training observations.
struct BlockLayout {
  std::vector<Eigen::MatrixXd> points;  // per species: n_j x d input matrix
  std::vector<int> sizes;
  std::vector<int> offsets;
  int total = 0;

  static BlockLayout from_points(std::vector<Eigen::MatrixXd> pts);
  int n_species() const { return static_cast<int>(points.size()); }
};

enum class PredictTarget : std::int8_t { Full, Covariate, Spatial, Offset };

/// Which latent component a cross-covariance refers to.
struct TargetSpec {
  PredictTarget kind = PredictTarget::Full;
  int covariate = -1;  // term index when kind == Covariate

  static TargetSpec full() { return {PredictTarget::Full, -1}; }
  static TargetSpec covariate(int r) { return {PredictTarget::Covariate, r}; }
  static TargetSpec spatial() { return {PredictTarget::Spatial, -1}; }
  static TargetSpec offset() { return {PredictTarget::Offset, -1}; }
};

/// Dense prior covariance over all species' observations: offset blocks +
/// covariate LMC blocks + spatial LMC blocks.
Eigen::MatrixXd assemble_lmc_cov(const CoregSet& coreg,
                                 const std::vector<TermKernels>& h_kernels,
                                 const TermKernels& eps_kernels,
                                 const BlockLayout& layout,
                                 std::uint64_t size_cap_bytes = (1ull << 31));

/// Cross-covariance between the target latent of `species` at `test_points`
/// and the full training latent vector.
Eigen::MatrixXd assemble_cross_cov(const CoregSet& coreg,
                                   const std::vector<TermKernels>& h_kernels,
                                   const TermKernels& eps_kernels,
                                   const Eigen::MatrixXd& test_points, int species,
                                   const BlockLayout& layout, const TargetSpec& target);

/// Prior covariance of the target latent of `species` at the test points.
Eigen::MatrixXd assemble_test_cov(const CoregSet& coreg,
                                  const std::vector<TermKernels>& h_kernels,
                                  const TermKernels& eps_kernels,
                                  const Eigen::MatrixXd& test_points, int species,
                                  const TargetSpec& target);

}  // namespace mvgp

#endif
