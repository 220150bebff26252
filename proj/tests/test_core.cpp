#include <doctest.h>

#include <random>

#include "sogmm/core.hpp"
#include "support/synthetic.hpp"

using namespace sogmm;

TEST_CASE("depth_to_pointcloud projects the principal-point ray to the optical axis") {
  ImagePair pair;
  pair.depth = ImageD::Zero(3, 3);
  pair.gray = ImageD::Zero(3, 3);
  pair.depth(1, 1) = 2.0;
  pair.gray(1, 1) = 0.5;
  const CameraIntrinsics k{100.0, 100.0, 1.0, 1.0};

  const PointCloud4 cloud = depth_to_pointcloud(pair, k);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud.points[0](0) == 0.0);
  CHECK(cloud.points[0](1) == 0.0);
  CHECK(cloud.points[0](2) == 2.0);
  CHECK(cloud.points[0](3) == 0.5);
}

TEST_CASE("depth_to_pointcloud matches the pinhole formula") {
  // fx = fy = 100, cx = cy = 0, pixel (u=50, v=0), d = 1 -> (0.5, 0, 1, g)
  ImagePair pair;
  pair.depth = ImageD::Zero(1, 51);
  pair.gray = ImageD::Constant(1, 51, 0.25);
  pair.depth(0, 50) = 1.0;
  const CameraIntrinsics k{100.0, 100.0, 0.0, 0.0};

  const PointCloud4 cloud = depth_to_pointcloud(pair, k);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud.points[0](0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cloud.points[0](1) == 0.0);
  CHECK(cloud.points[0](2) == 1.0);
  CHECK(cloud.points[0](3) == 0.25);
}

TEST_CASE("depth_to_pointcloud rejects an all-invalid image") {
  ImagePair pair;
  pair.depth = ImageD::Zero(4, 4);
  pair.gray = ImageD::Constant(4, 4, 0.5);
  const CameraIntrinsics k{100.0, 100.0, 2.0, 2.0};
  CHECK_THROWS_AS(depth_to_pointcloud(pair, k), EmptyInputError);
}

TEST_CASE("depth_to_pointcloud validates inputs") {
  ImagePair pair = testsupport::flat_scene(4, 4);
  SUBCASE("bad focal length") {
    CHECK_THROWS_AS(depth_to_pointcloud(pair, CameraIntrinsics{0.0, 1.0, 0.0, 0.0}),
                    ParameterError);
  }
  SUBCASE("mismatched image sizes") {
    pair.gray = ImageD::Constant(4, 5, 0.5);
    CHECK_THROWS_AS(depth_to_pointcloud(pair, CameraIntrinsics{1.0, 1.0, 0.0, 0.0}),
                    ParameterError);
  }
  SUBCASE("gray outside [0, 1]") {
    pair.gray(0, 0) = 1.5;
    CHECK_THROWS_AS(depth_to_pointcloud(pair, CameraIntrinsics{1.0, 1.0, 0.0, 0.0}),
                    ParameterError);
  }
  SUBCASE("negative depth") {
    pair.depth(0, 0) = -0.5;
    CHECK_THROWS_AS(depth_to_pointcloud(pair, CameraIntrinsics{1.0, 1.0, 0.0, 0.0}),
                    ParameterError);
  }
}

TEST_CASE("extract_depth_intensity keeps one tuple per valid pixel") {
  ImagePair pair;
  pair.depth = ImageD::Constant(2, 2, 1.0);
  pair.gray = ImageD::Constant(2, 2, 0.5);

  SUBCASE("all valid") {
    CHECK(extract_depth_intensity(pair).size() == 4);
  }
  SUBCASE("invalid pixels are dropped") {
    pair.depth(0, 1) = 0.0;
    CHECK(extract_depth_intensity(pair).size() == 3);
  }
  SUBCASE("all invalid") {
    pair.depth.setZero();
    CHECK_THROWS_AS(extract_depth_intensity(pair), EmptyInputError);
  }
}

TEST_CASE("extract_depth_intensity pairs depth and gray by pixel") {
  ImagePair pair;
  pair.depth.resize(1, 2);
  pair.gray.resize(1, 2);
  pair.depth << 1.0, 2.0;
  pair.gray << 0.1, 0.9;
  const DepthIntensityDataset data = extract_depth_intensity(pair);
  REQUIRE(data.size() == 2);
  CHECK((data.points[0].array() == Vec2(1.0, 0.1).array()).all());
  CHECK((data.points[1].array() == Vec2(2.0, 0.9).array()).all());
}

TEST_CASE("point cloud and depth-intensity dataset sizes agree") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ImagePair pair;
  pair.depth.resize(13, 17);
  pair.gray.resize(13, 17);
  for (Eigen::Index v = 0; v < 13; ++v) {
    for (Eigen::Index u = 0; u < 17; ++u) {
      pair.depth(v, u) = unit(rng) < 0.3 ? 0.0 : 1.0 + unit(rng);
      pair.gray(v, u) = unit(rng);
    }
  }
  const CameraIntrinsics k = testsupport::scene_intrinsics(13, 17);
  CHECK(depth_to_pointcloud(pair, k).size() == extract_depth_intensity(pair).size());
}

TEST_CASE("a plane at constant depth projects to points with that exact z") {
  const ImagePair pair = testsupport::flat_scene(8, 12);
  const PointCloud4 cloud = depth_to_pointcloud(pair, testsupport::scene_intrinsics(8, 12));
  for (const Vec4& p : cloud.points) {
    CHECK(p(2) == 1.5);
  }
}

TEST_CASE("extract_depth_intensity stride subsamples the grid") {
  const ImagePair pair = testsupport::flat_scene(8, 8);
  CHECK(extract_depth_intensity(pair, 2).size() == 16);
  CHECK(extract_depth_intensity(pair, 8).size() == 1);
  CHECK_THROWS_AS(extract_depth_intensity(pair, 0), ParameterError);
}

TEST_CASE("conditional term partitions reassemble the component exactly") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    GaussianComponent4 c;
    c.weight = 1.0;
    for (int i = 0; i < 4; ++i) {
      c.mean(i) = unit(rng);
    }
    Mat4 a;
    for (int r = 0; r < 4; ++r) {
      for (int s = 0; s < 4; ++s) {
        a(r, s) = unit(rng);
      }
    }
    c.covariance = a * a.transpose() + Mat4::Identity();

    const ConditionalGaussianTerms terms = ConditionalGaussianTerms::split(c);
    Vec4 mean;
    Mat4 cov;
    terms.reassemble(mean, cov);
    CHECK((mean.array() == c.mean.array()).all());
    CHECK((cov.array() == c.covariance.array()).all());
  }
}

TEST_CASE("gmm validation enforces the invariants") {
  Gmm4 model;
  SUBCASE("no components") {
    CHECK_THROWS_AS(model.validate(), ParameterError);
  }
  GaussianComponent4 c;
  c.weight = 1.0;
  c.covariance = Mat4::Identity();
  model.components.push_back(c);
  SUBCASE("valid single component passes") {
    CHECK_NOTHROW(model.validate());
  }
  SUBCASE("weights must sum to one") {
    model.components[0].weight = 0.9;
    CHECK_THROWS_AS(model.validate(), ParameterError);
  }
  SUBCASE("covariance must be positive definite") {
    model.components[0].covariance(0, 0) = -1.0;
    CHECK_THROWS_AS(model.validate(), ParameterError);
  }
  SUBCASE("covariance must be symmetric") {
    model.components[0].covariance(0, 1) = 0.5;
    CHECK_THROWS_AS(model.validate(), ParameterError);
  }
}

TEST_CASE("mean shift config defaults and validation") {
  const MeanShiftConfig cfg = MeanShiftConfig::for_bandwidth(0.02);
  CHECK(cfg.bandwidth == 0.02);
  CHECK(cfg.merge_radius() == 0.01);
  CHECK(cfg.kernel == Kernel::kFlat);
  CHECK(cfg.variant == MeanShiftVariant::kGbms);
  CHECK_NOTHROW(cfg.validate());

  MeanShiftConfig bad = cfg;
  bad.bandwidth = 0.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = cfg;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = cfg;
  bad.convergence_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = cfg;
  bad.stride = 0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}
