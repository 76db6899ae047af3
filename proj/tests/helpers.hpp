#ifndef MVGP_TEST_HELPERS_HPP
#define MVGP_TEST_HELPERS_HPP

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "mvgp/coreg.hpp"
#include "mvgp/laplace.hpp"
#include "mvgp/structure.hpp"

namespace mvgp::testing {

/// Points with columns [s1, s2, x]: a 2-D location and one covariate.
inline Eigen::MatrixXd random_inputs(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd X(n, 3);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < 3; ++d) X(i, d) = dist(gen);
  return X;
}

/// One covariate term (gaussian kernel) plus a matern spatial term over all
/// species.
inline ModelStructure make_structure(const std::vector<ObsModel>& obs, bool couple_h,
                                     bool couple_eps, bool include_spatial = true) {
  ModelStructure s;
  s.n_species = static_cast<int>(obs.size());
  s.obs_init = obs;
  TermStructure h;
  h.name = "x";
  h.spec = KernelSpec{KernelFamily::Gaussian, {2}, true};
  for (int j = 0; j < s.n_species; ++j) h.active.push_back(j);
  h.coupled = couple_h;
  s.h_terms.push_back(h);
  if (include_spatial) {
    s.include_spatial = true;
    s.eps_term.name = "spatial";
    s.eps_term.spec = KernelSpec{KernelFamily::Matern32, {0, 1}, true};
    for (int j = 0; j < s.n_species; ++j) s.eps_term.active.push_back(j);
    s.eps_term.coupled = couple_eps;
  }
  s.finalize();
  return s;
}

inline BlockLayout make_layout(int J, int n_per_species, unsigned seed) {
  std::vector<Eigen::MatrixXd> pts;
  for (int j = 0; j < J; ++j) pts.push_back(random_inputs(n_per_species, seed + 10 * j));
  return BlockLayout::from_points(pts);
}

/// Draws observations from the prior predictive at a random latent scale.
inline LikelihoodData random_data(const std::vector<ObsModel>& obs, const BlockLayout& layout,
                                  unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> uy(0, 6);
  LikelihoodData data;
  data.models = obs;
  const int n = layout.total;
  data.y.resize(n);
  data.z.resize(n);
  data.species.resize(static_cast<size_t>(n));
  for (size_t j = 0; j < layout.points.size(); ++j)
    for (int i = 0; i < layout.sizes[j]; ++i)
      data.species[static_cast<size_t>(layout.offsets[j] + i)] = static_cast<int>(j);
  for (int i = 0; i < n; ++i) {
    switch (data.model_of(i).kind) {
      case ObsKind::BinomialLogit:
        data.z[i] = 10;
        data.y[i] = uy(gen);
        break;
      case ObsKind::NegBin:
      case ObsKind::Poisson:
        data.z[i] = 1.5;
        data.y[i] = uy(gen);
        break;
      case ObsKind::Gaussian:
        data.z[i] = 1.0;
        data.y[i] = nd(gen);
        break;
    }
  }
  return data;
}

}  // namespace mvgp::testing

#endif
