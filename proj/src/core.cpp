#include "sogmm/core.hpp"

#include <cmath>
#include <string>

namespace sogmm {

void ImagePair::validate() const {
  if (depth.rows() <= 0 || depth.cols() <= 0) {
    throw ParameterError("image pair: empty images");
  }
  if (depth.rows() != gray.rows() || depth.cols() != gray.cols()) {
    throw ParameterError("image pair: depth is " + std::to_string(depth.rows()) + "x" +
                         std::to_string(depth.cols()) + " but gray is " +
                         std::to_string(gray.rows()) + "x" + std::to_string(gray.cols()));
  }
  if (!depth.allFinite() || !gray.allFinite()) {
    throw ParameterError("image pair: non-finite pixel value");
  }
  if ((depth.array() < 0.0).any()) {
    throw ParameterError("image pair: negative depth value");
  }
  if ((gray.array() < 0.0).any() || (gray.array() > 1.0).any()) {
    throw ParameterError("image pair: gray value outside [0, 1]");
  }
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw ParameterError("camera intrinsics: focal lengths must be positive");
  }
  if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) || !std::isfinite(cy)) {
    throw ParameterError("camera intrinsics: non-finite value");
  }
}

void Gmm4::validate(double weight_tol, double min_eigenvalue) const {
  if (components.empty()) {
    throw ParameterError("gmm: model has no components");
  }
  double weight_sum = 0.0;
  for (std::size_t m = 0; m < components.size(); ++m) {
    const auto& c = components[m];
    if (!(c.weight > 0.0) || c.weight > 1.0 + weight_tol) {
      throw ParameterError("gmm: component " + std::to_string(m) + " weight outside (0, 1]");
    }
    if (!c.mean.allFinite() || !c.covariance.allFinite()) {
      throw ParameterError("gmm: component " + std::to_string(m) + " has non-finite parameters");
    }
    if ((c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
      throw ParameterError("gmm: component " + std::to_string(m) + " covariance not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat4> eigs(c.covariance, Eigen::EigenvaluesOnly);
    if (eigs.eigenvalues().minCoeff() <= min_eigenvalue) {
      throw ParameterError("gmm: component " + std::to_string(m) +
                           " covariance not positive definite above floor");
    }
    weight_sum += c.weight;
  }
  if (std::abs(weight_sum - 1.0) > weight_tol) {
    throw ParameterError("gmm: weights sum to " + std::to_string(weight_sum));
  }
}

MeanShiftConfig MeanShiftConfig::for_bandwidth(double sigma) {
  MeanShiftConfig cfg;
  cfg.bandwidth = sigma;
  cfg.mode_merge_radius = 0.5 * sigma;
  return cfg;
}

void MeanShiftConfig::validate() const {
  if (!(bandwidth > 0.0)) {
    throw ParameterError("mean shift: bandwidth must be positive");
  }
  if (max_iterations < 1) {
    throw ParameterError("mean shift: max_iterations must be >= 1");
  }
  if (!(convergence_tol > 0.0)) {
    throw ParameterError("mean shift: convergence_tol must be positive");
  }
  if (!(merge_radius() > 0.0)) {
    throw ParameterError("mean shift: mode_merge_radius must be positive");
  }
  if (stride < 1) {
    throw ParameterError("mean shift: stride must be >= 1");
  }
}

ConditionalGaussianTerms ConditionalGaussianTerms::split(const GaussianComponent4& component) {
  ConditionalGaussianTerms t;
  t.mean_x = component.mean.head<3>();
  t.mean_g = component.mean(3);
  t.cov_xx = component.covariance.topLeftCorner<3, 3>();
  t.cov_xg = component.covariance.topRightCorner<3, 1>();
  t.cov_gx = component.covariance.bottomLeftCorner<1, 3>();
  t.cov_gg = component.covariance(3, 3);
  return t;
}

void ConditionalGaussianTerms::reassemble(Vec4& mean, Mat4& covariance) const {
  mean.head<3>() = mean_x;
  mean(3) = mean_g;
  covariance.topLeftCorner<3, 3>() = cov_xx;
  covariance.topRightCorner<3, 1>() = cov_xg;
  covariance.bottomLeftCorner<1, 3>() = cov_gx;
  covariance(3, 3) = cov_gg;
}

PointCloud4 depth_to_pointcloud(const ImagePair& pair, const CameraIntrinsics& k) {
  pair.validate();
  k.validate();
  PointCloud4 cloud;
  cloud.points.reserve(static_cast<std::size_t>(pair.height() * pair.width()));
  for (Eigen::Index v = 0; v < pair.height(); ++v) {
    for (Eigen::Index u = 0; u < pair.width(); ++u) {
      const double d = pair.depth(v, u);
      if (d <= 0.0) {
        continue;
      }
      cloud.points.emplace_back((static_cast<double>(u) - k.cx) * d / k.fx,
                                (static_cast<double>(v) - k.cy) * d / k.fy, d, pair.gray(v, u));
    }
  }
  if (cloud.empty()) {
    throw EmptyInputError("depth_to_pointcloud: no valid depth pixels");
  }
  return cloud;
}

DepthIntensityDataset extract_depth_intensity(const ImagePair& pair, int stride) {
  pair.validate();
  if (stride < 1) {
    throw ParameterError("extract_depth_intensity: stride must be >= 1");
  }
  DepthIntensityDataset data;
  data.points.reserve(static_cast<std::size_t>((pair.height() / stride + 1) *
                                               (pair.width() / stride + 1)));
  for (Eigen::Index v = 0; v < pair.height(); v += stride) {
    for (Eigen::Index u = 0; u < pair.width(); u += stride) {
      const double d = pair.depth(v, u);
      if (d <= 0.0) {
        continue;
      }
      data.points.emplace_back(d, pair.gray(v, u));
    }
  }
  if (data.empty()) {
    throw EmptyInputError("extract_depth_intensity: no valid depth pixels");
  }
  return data;
}

}  // namespace sogmm
