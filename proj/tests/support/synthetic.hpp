#pragma once

// Synthetic fixtures shared by the unit and acceptance suites.

#include <cstdint>
#include <random>

#include "sogmm/core.hpp"

namespace testsupport {

inline sogmm::CameraIntrinsics scene_intrinsics(int h = 48, int w = 64) {
  return {300.0, 300.0, (w - 1) / 2.0, (h - 1) / 2.0};
}

// Homogeneous scene: one fronto-parallel plane at constant intensity.
inline sogmm::ImagePair flat_scene(int h = 48, int w = 64) {
  sogmm::ImagePair pair;
  pair.depth = sogmm::ImageD::Constant(h, w, 1.5);
  pair.gray = sogmm::ImageD::Constant(h, w, 0.5);
  return pair;
}

// Two planes split left/right at different depths, each carrying its own
// intensity band, with mild gradients inside each half so the
// depth-intensity dataset is not a handful of repeated points.
inline sogmm::ImagePair two_plane_scene(int h = 48, int w = 64) {
  sogmm::ImagePair pair;
  pair.depth.resize(h, w);
  pair.gray.resize(h, w);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double fu = static_cast<double>(u) / (w - 1);
      const double fv = static_cast<double>(v) / (h - 1);
      if (u < w / 2) {
        pair.depth(v, u) = 1.0 + 0.12 * fv;
        pair.gray(v, u) = 0.30 + 0.08 * fu;
      } else {
        pair.depth(v, u) = 2.0 + 0.12 * (1.0 - fv);
        pair.gray(v, u) = 0.68 + 0.08 * fu;
      }
    }
  }
  return pair;
}

// Random mixture with well-conditioned covariances: spatial variances a
// few centimeters, intensity variance bounded below so conditional
// quadrature stays cheap, means interior in intensity.
inline sogmm::Gmm4 random_model(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> weight_dist(0.2, 1.0);

  sogmm::Gmm4 model;
  model.components.resize(m);
  double weight_sum = 0.0;
  for (auto& c : model.components) {
    c.weight = weight_dist(rng);
    weight_sum += c.weight;
    c.mean << 0.5 * unit(rng), 0.5 * unit(rng), 1.5 + 0.5 * unit(rng), 0.5 + 0.15 * unit(rng);
    sogmm::Mat4 a;
    for (int r = 0; r < 4; ++r) {
      for (int s = 0; s < 4; ++s) {
        a(r, s) = 0.15 * unit(rng);
      }
    }
    sogmm::Mat4 cov = a * a.transpose();
    cov.diagonal() += sogmm::Vec4(0.05, 0.05, 0.05, 0.02);
    c.covariance = cov;
  }
  for (auto& c : model.components) {
    c.weight /= weight_sum;
  }
  return model;
}

// Two separated Gaussian blobs in the plane, for mode-seeking tests.
inline sogmm::DepthIntensityDataset two_cluster_dataset(int points_per_cluster,
                                                        std::uint64_t seed,
                                                        double spread = 0.05) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spread);
  sogmm::DepthIntensityDataset data;
  data.points.reserve(2 * points_per_cluster);
  for (int i = 0; i < points_per_cluster; ++i) {
    data.points.emplace_back(noise(rng), noise(rng));
  }
  for (int i = 0; i < points_per_cluster; ++i) {
    data.points.emplace_back(1.0 + noise(rng), 1.0 + noise(rng));
  }
  return data;
}

}  // namespace testsupport
