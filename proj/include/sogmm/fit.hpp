#pragma once

#include <cstdint>
#include <vector>

#include "sogmm/core.hpp"

namespace sogmm {

// Hard partition produced by the seeding stage.
struct KInitResult {
  std::vector<Vec4> centroids;
  std::vector<int> assignment;  // per point, index into centroids

  int cluster_count() const { return static_cast<int>(centroids.size()); }
};

struct EmConfig {
  int max_iterations = 100;
  double loglik_rel_tol = 1e-6;
  double covariance_floor = 1e-6;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Seeding steps of K-Means++: the first centroid uniform over the cloud,
// each further centroid drawn with probability proportional to the squared
// distance to its nearest chosen centroid, then one nearest-centroid
// assignment pass. No Lloyd iterations. Deterministic given the seed.
KInitResult kmeans_pp_seed(const PointCloud4& cloud, int m, std::uint64_t seed);

// Expectation-Maximization on the 4D mixture, started from the hard
// partition's cluster proportions, means, and covariances. Stops when the
// relative log-likelihood improvement falls below loglik_rel_tol or after
// max_iterations. Every returned covariance has its spectrum floored at
// cfg.covariance_floor. When `loglik_trace` is given it receives the data
// log-likelihood of the parameters entering each iteration.
Gmm4 em_fit(const PointCloud4& cloud, const KInitResult& init, const EmConfig& cfg,
            std::vector<double>* loglik_trace = nullptr);

// Per-point posterior component probabilities under the model; rows sum
// to one.
Eigen::MatrixXd responsibilities(const Gmm4& model, const PointCloud4& cloud);

// Full pipeline for one image pair: estimate the component count by mode
// seeking on (depth, intensity), project the cloud, seed, and run EM.
Gmm4 fit_sogmm(const ImagePair& pair, const CameraIntrinsics& k, const MeanShiftConfig& ms_cfg,
               const EmConfig& em_cfg);

}  // namespace sogmm
