#include "sogmm/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <vector>

#include "sogmm/detail/random.hpp"
#include "sogmm/regress.hpp"

namespace sogmm {

namespace {

// Symmetric square roots of the covariances plus the normalized cumulative
// weights; everything the sampling loop needs, computed once.
struct SamplerTables {
  std::vector<double> cumulative;
  std::vector<Vec4> means;
  std::vector<Mat4> sqrt_covs;
};

// Consumers accept any structurally sound mixture (including zero weights
// and file-quantized weight sums); strict invariants are enforced on the
// producing side.
void require_usable(const Gmm4& model) {
  if (model.components.empty()) {
    throw ParameterError("sample_gmm: model has no components");
  }
  double total = 0.0;
  for (const auto& c : model.components) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight) || !c.mean.allFinite() ||
        !c.covariance.allFinite()) {
      throw ParameterError("sample_gmm: component has invalid parameters");
    }
    total += c.weight;
  }
  if (!(total > 0.0)) {
    throw ParameterError("sample_gmm: weights sum to zero");
  }
}

SamplerTables build_tables(const Gmm4& model) {
  require_usable(model);
  SamplerTables tables;
  tables.cumulative.reserve(model.components.size());
  tables.means.reserve(model.components.size());
  tables.sqrt_covs.reserve(model.components.size());
  double running = 0.0;
  for (const auto& c : model.components) {
    running += c.weight;
    tables.cumulative.push_back(running);
    tables.means.push_back(c.mean);
    Eigen::SelfAdjointEigenSolver<Mat4> eigs(c.covariance);
    if (eigs.info() != Eigen::Success) {
      throw NumericalError("sample_gmm: eigendecomposition failed");
    }
    const Vec4 scaled = eigs.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    tables.sqrt_covs.push_back(eigs.eigenvectors() * scaled.asDiagonal() *
                               eigs.eigenvectors().transpose());
  }
  // Normalize so the final bucket always closes at 1.
  for (double& c : tables.cumulative) {
    c /= tables.cumulative.back();
  }
  return tables;
}

std::size_t pick_component(const SamplerTables& tables, double u) {
  const auto it = std::upper_bound(tables.cumulative.begin(), tables.cumulative.end(), u);
  const auto idx = static_cast<std::size_t>(it - tables.cumulative.begin());
  return std::min(idx, tables.cumulative.size() - 1);
}

}  // namespace

PointCloud4 sample_gmm(const Gmm4& model, std::size_t n, std::uint64_t seed) {
  if (n < 1) {
    throw ParameterError("sample_gmm: n must be >= 1");
  }
  const SamplerTables tables = build_tables(model);
  detail::Rng rng(seed);
  PointCloud4 cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t m = pick_component(tables, rng.next_double());
    Vec4 z;
    for (int d = 0; d < 4; ++d) {
      z(d) = rng.next_gaussian();
    }
    Vec4 p = tables.means[m] + tables.sqrt_covs[m] * z;
    p(3) = std::clamp(p(3), 0.0, 1.0);
    cloud.points.push_back(p);
  }
  return cloud;
}

PointCloud4 reconstruct(const Gmm4& model, std::size_t n, std::uint64_t seed) {
  PointCloud4 cloud = sample_gmm(model, n, seed);
  const ConditionalRegressor regressor(model);
  std::size_t out_of_support = 0;
  for (Vec4& p : cloud.points) {
    try {
      p(3) = regressor.expected_intensity(p.head<3>());
    } catch (const OutOfSupportError&) {
      ++out_of_support;
    }
  }
  if (out_of_support > 0) {
    std::clog << "reconstruct: " << out_of_support
              << " samples outside the conditional support kept their generative intensity\n";
  }
  return cloud;
}

}  // namespace sogmm
