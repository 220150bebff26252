#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sogmm/errors.hpp"

namespace sogmm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using ImageD = Eigen::MatrixXd;  // rows = image height, cols = image width

// Registered depth (meters, 0 = invalid) + intensity (in [0, 1]) image pair.
struct ImagePair {
  ImageD depth;
  ImageD gray;

  Eigen::Index height() const { return depth.rows(); }
  Eigen::Index width() const { return depth.cols(); }

  void validate() const;
};

// Pinhole camera parameters in pixels.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const;
};

// 2D dataset of (depth, intensity) tuples, one per valid depth pixel.
struct DepthIntensityDataset {
  std::vector<Vec2> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// 4D point cloud: (x, y, z) meters plus intensity.
struct PointCloud4 {
  std::vector<Vec4> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// One mixture component: weight, 4D mean, 4x4 covariance.
struct GaussianComponent4 {
  double weight = 0.0;
  Vec4 mean = Vec4::Zero();
  Mat4 covariance = Mat4::Identity();
};

// Finite Gaussian mixture over (x, y, z, g).
struct Gmm4 {
  std::vector<GaussianComponent4> components;

  int size() const { return static_cast<int>(components.size()); }

  // Checks weights (each in (0, 1], summing to 1 within weight_tol),
  // symmetry, and positive-definiteness above min_eigenvalue.
  // Freshly fitted models hold the tight default; deserialized models
  // carry 32-bit weights and need a looser weight_tol.
  void validate(double weight_tol = 1e-9, double min_eigenvalue = 0.0) const;
};

enum class Kernel { kGaussian, kFlat };
enum class MeanShiftVariant { kGms, kGbms };

// Controls for the mode-seeking stage. `mode_merge_radius` <= 0 selects
// the default of bandwidth / 2.
struct MeanShiftConfig {
  double bandwidth = 0.0;
  Kernel kernel = Kernel::kFlat;
  MeanShiftVariant variant = MeanShiftVariant::kGbms;
  int max_iterations = 100;
  double convergence_tol = 1e-4;
  double mode_merge_radius = 0.0;
  int stride = 1;

  static MeanShiftConfig for_bandwidth(double sigma);

  double merge_radius() const {
    return mode_merge_radius > 0.0 ? mode_merge_radius : 0.5 * bandwidth;
  }

  void validate() const;
};

// Partition of one 4D component into spatial and intensity blocks.
struct ConditionalGaussianTerms {
  Vec3 mean_x = Vec3::Zero();
  double mean_g = 0.0;
  Mat3 cov_xx = Mat3::Identity();
  Vec3 cov_xg = Vec3::Zero();
  Eigen::RowVector3d cov_gx = Eigen::RowVector3d::Zero();
  double cov_gg = 0.0;

  static ConditionalGaussianTerms split(const GaussianComponent4& component);

  // Inverse of split(): rebuilds the full mean and covariance bitwise.
  void reassemble(Vec4& mean, Mat4& covariance) const;
};

// Projects every valid depth pixel through the pinhole model, pairing it
// with its intensity. Pixel (u = column, v = row) with depth d maps to
// ((u - cx) d / fx, (v - cy) d / fy, d, g). Throws EmptyInputError when no
// pixel is valid.
PointCloud4 depth_to_pointcloud(const ImagePair& pair, const CameraIntrinsics& k);

// Collects the (depth, intensity) tuple of every valid depth pixel,
// optionally subsampled by a pixel stride in both image axes. Pixel order
// matches depth_to_pointcloud. Throws EmptyInputError when no pixel is
// valid.
DepthIntensityDataset extract_depth_intensity(const ImagePair& pair, int stride = 1);

}  // namespace sogmm
