#include "sogmm/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sogmm/detail/parallel.hpp"

namespace sogmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double gaussian_density_1d(double value, double mean, double variance) {
  const double d = value - mean;
  return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

}  // namespace

ConditionalRegressor::ConditionalRegressor(const Gmm4& model) {
  if (model.components.empty()) {
    throw ParameterError("conditional regressor: model has no components");
  }
  double weight_sum = 0.0;
  for (const auto& c : model.components) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight) || !c.mean.allFinite() ||
        !c.covariance.allFinite()) {
      throw ParameterError("conditional regressor: component has invalid parameters");
    }
    weight_sum += c.weight;
  }
  if (!(weight_sum > 0.0)) {
    throw ParameterError("conditional regressor: weights sum to zero");
  }
  components_.reserve(model.components.size());
  for (const auto& raw : model.components) {
    const ConditionalGaussianTerms terms = ConditionalGaussianTerms::split(raw);
    Component c;
    c.log_weight = std::log(raw.weight / weight_sum);
    c.mean_x = terms.mean_x;
    c.mean_g = terms.mean_g;
    c.chol_xx.compute(terms.cov_xx);
    if (c.chol_xx.info() != Eigen::Success) {
      throw NumericalError("conditional regressor: spatial covariance block not positive definite");
    }
    c.gx_times_inv = c.chol_xx.solve(terms.cov_xg).transpose();
    c.nu_sq = terms.cov_gg - c.gx_times_inv.dot(terms.cov_xg);
    if (!(c.nu_sq > 0.0)) {
      throw NumericalError("conditional regressor: non-positive conditional variance");
    }
    const Mat3 lower = c.chol_xx.matrixL();
    double log_det = 0.0;
    for (int i = 0; i < 3; ++i) {
      log_det += std::log(lower(i, i));
    }
    c.log_norm = -log_det - 1.5 * kLog2Pi;
    components_.push_back(std::move(c));
  }
}

void ConditionalRegressor::conditional_mixture(const Vec3& x, Eigen::VectorXd& weights,
                                               Eigen::VectorXd& means) const {
  const auto n_comp = static_cast<Eigen::Index>(components_.size());
  weights.resize(n_comp);
  means.resize(n_comp);
  double max_log = -std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; m < n_comp; ++m) {
    const Component& c = components_[m];
    const Vec3 diff = x - c.mean_x;
    const Vec3 solved = c.chol_xx.matrixL().solve(diff);
    weights(m) = c.log_weight + c.log_norm - 0.5 * solved.squaredNorm();
    max_log = std::max(max_log, weights(m));
    means(m) = c.mean_g + c.gx_times_inv.dot(diff);
  }
  if (!std::isfinite(max_log)) {
    throw OutOfSupportError("conditional regressor: all spatial densities underflowed");
  }
  double total = 0.0;
  for (Eigen::Index m = 0; m < n_comp; ++m) {
    weights(m) = std::exp(weights(m) - max_log);
    total += weights(m);
  }
  weights /= total;
}

double ConditionalRegressor::conditional_density(const Vec3& x, double g) const {
  Eigen::VectorXd weights;
  Eigen::VectorXd means;
  conditional_mixture(x, weights, means);
  double density = 0.0;
  for (Eigen::Index m = 0; m < weights.size(); ++m) {
    density += weights(m) * gaussian_density_1d(g, means(m), components_[m].nu_sq);
  }
  return density;
}

double ConditionalRegressor::expected_intensity(const Vec3& x) const {
  Eigen::VectorXd weights;
  Eigen::VectorXd means;
  conditional_mixture(x, weights, means);
  const double expectation = weights.dot(means);
  return std::clamp(expectation, 0.0, 1.0);
}

double conditional_intensity_density(const Gmm4& model, const Vec3& x, double g) {
  return ConditionalRegressor(model).conditional_density(x, g);
}

double expected_intensity(const Gmm4& model, const Vec3& x) {
  return ConditionalRegressor(model).expected_intensity(x);
}

ImageD regress_image(const Gmm4& model, const CameraIntrinsics& k, const ImageD& depth) {
  k.validate();
  const ConditionalRegressor regressor(model);
  ImageD gray = ImageD::Zero(depth.rows(), depth.cols());
  const auto width = static_cast<std::size_t>(depth.cols());
  detail::parallel_chunks(
      static_cast<std::size_t>(depth.size()), 256,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
          const auto v = static_cast<Eigen::Index>(p / width);
          const auto u = static_cast<Eigen::Index>(p % width);
          const double d = depth(v, u);
          if (d <= 0.0) {
            continue;
          }
          const Vec3 x((static_cast<double>(u) - k.cx) * d / k.fx,
                       (static_cast<double>(v) - k.cy) * d / k.fy, d);
          gray(v, u) = regressor.expected_intensity(x);
        }
      });
  return gray;
}

}  // namespace sogmm
