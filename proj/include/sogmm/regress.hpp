#pragma once

#include <vector>

#include "sogmm/core.hpp"

namespace sogmm {

// Evaluates the conditional distribution of intensity given a spatial
// location under a 4D mixture. The spatial-block factorizations are
// computed once at construction so per-query work is a handful of small
// matrix products; image regression issues one query per pixel.
class ConditionalRegressor {
 public:
  explicit ConditionalRegressor(const Gmm4& model);

  int component_count() const { return static_cast<int>(components_.size()); }

  // Conditional variance of component m (Schur complement); positive for
  // every valid model.
  double conditional_variance(int m) const { return components_[m].nu_sq; }

  // Spatial mixture weights w(x) (softmax over component log-masses, sums
  // to one) and per-component conditional means lambda(x).
  void conditional_mixture(const Vec3& x, Eigen::VectorXd& weights,
                           Eigen::VectorXd& means) const;

  // Density of intensity g at spatial location x.
  double conditional_density(const Vec3& x, double g) const;

  // Conditional mean of intensity at x, clamped to [0, 1].
  double expected_intensity(const Vec3& x) const;

 private:
  struct Component {
    double log_weight;
    Vec3 mean_x;
    double mean_g;
    Eigen::LLT<Mat3> chol_xx;         // factor of the spatial block
    Eigen::RowVector3d gx_times_inv;  // cov_gx * cov_xx^{-1}
    double log_norm;                  // log-normalizer of the spatial marginal
    double nu_sq;                     // conditional variance
  };

  std::vector<Component> components_;
};

// One-shot conveniences over ConditionalRegressor.
double conditional_intensity_density(const Gmm4& model, const Vec3& x, double g);
double expected_intensity(const Gmm4& model, const Vec3& x);

// Back-projects every valid pixel of `depth` through the pinhole model and
// writes the expected intensity there; invalid pixels get 0.
ImageD regress_image(const Gmm4& model, const CameraIntrinsics& k, const ImageD& depth);

}  // namespace sogmm
