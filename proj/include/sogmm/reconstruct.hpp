#pragma once

#include <cstdint>

#include "sogmm/core.hpp"

namespace sogmm {

// n i.i.d. draws from the mixture: a component index from the categorical
// weights, then a draw from that component's Gaussian. The intensity
// channel is clamped to [0, 1]. Deterministic given the seed.
PointCloud4 sample_gmm(const Gmm4& model, std::size_t n, std::uint64_t seed);

// Samples n points, then replaces each intensity with the conditional
// expectation at the sampled spatial location. A sample whose location
// falls outside the model's spatial support keeps its generative
// intensity.
PointCloud4 reconstruct(const Gmm4& model, std::size_t n, std::uint64_t seed);

}  // namespace sogmm
