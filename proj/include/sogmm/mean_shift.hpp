#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "sogmm/core.hpp"

namespace sogmm {

// Isotropic Gaussian kernel with bandwidth sigma, normalized over the
// dimension of `diff` so that it integrates to one.
template <typename Derived>
double gaussian_kernel(const Eigen::MatrixBase<Derived>& diff, double sigma) {
  if (!(sigma > 0.0)) {
    throw ParameterError("gaussian_kernel: sigma must be positive");
  }
  const auto dim = static_cast<double>(diff.size());
  const double norm =
      std::pow(2.0 * std::numbers::pi, -0.5 * dim) * std::pow(sigma, -dim);
  return norm * std::exp(-0.5 * diff.squaredNorm() / (sigma * sigma));
}

// Indicator kernel: 1 inside the closed ball of radius sigma, 0 outside.
template <typename Derived>
double flat_kernel(const Eigen::MatrixBase<Derived>& diff, double sigma) {
  if (!(sigma > 0.0)) {
    throw ParameterError("flat_kernel: sigma must be positive");
  }
  return diff.squaredNorm() <= sigma * sigma ? 1.0 : 0.0;
}

// Kernel density estimate at `query`: the mean of Gaussian kernels centered
// on the data points.
double kde_density(const Vec2& query, const DepthIntensityDataset& data, double sigma);

// One mode-seeking update of every point in `current` against `anchors`.
// Gaussian kernel: softmax-weighted average of the anchors (the kernel
// normalization cancels in the ratio). Flat kernel: arithmetic mean of the
// anchors within radius sigma; a point with no anchor in support is left
// unchanged.
std::vector<Vec2> mean_shift_step(const std::vector<Vec2>& current,
                                  const std::vector<Vec2>& anchors,
                                  const MeanShiftConfig& cfg);

// Compressed dataset: the surviving modes after iteration and merging.
struct ModeSet {
  std::vector<Vec2> modes;

  int count() const { return static_cast<int>(modes.size()); }
};

struct MeanShiftStats {
  int iterations = 0;
  double last_relative_displacement = 0.0;
};

// Iterates mean_shift_step from the dataset itself until the maximum point
// displacement per iteration drops below convergence_tol * bandwidth or
// max_iterations is reached, then merges the iterate single-linkage at
// mode_merge_radius. Every returned mode is the mean of its merged cluster
// and all modes are pairwise farther apart than mode_merge_radius.
ModeSet run_mean_shift(const DepthIntensityDataset& data, const MeanShiftConfig& cfg,
                       MeanShiftStats* stats = nullptr);

// Model-size estimate for an image pair: the number of modes of its
// (depth, intensity) dataset under the configured kernel and bandwidth.
int estimate_num_components(const ImagePair& pair, const MeanShiftConfig& cfg);

// Closed-form diagnostics of the compression objective: Renyi's quadratic
// entropy of the reduced set plus the Cauchy-Schwarz divergence between the
// reduced and original sets, both under Gaussian KDEs with the same sigma.
struct PriDiagnostics {
  double rqe = 0.0;
  double csd = 0.0;
  double objective = 0.0;
};

PriDiagnostics pri_objective(const ModeSet& reduced, const DepthIntensityDataset& original,
                             double sigma);

}  // namespace sogmm
