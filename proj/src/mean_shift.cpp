#include "sogmm/mean_shift.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <utility>

#include "sogmm/detail/parallel.hpp"

namespace sogmm {

namespace {

// Uniform hash grid over 2D points with cell size = query radius, so a
// radius query only has to visit the 3x3 cell neighborhood. Cell member
// lists keep insertion (= point index) order, which keeps accumulation
// order deterministic.
class UniformGrid2 {
 public:
  UniformGrid2(const std::vector<Vec2>& points, double cell) : points_(points), cell_(cell) {
    cells_.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      cells_[key_of(points[i])].push_back(static_cast<std::int32_t>(i));
    }
  }

  template <typename Fn>
  void for_each_in_ball(const Vec2& q, double radius, Fn&& fn) const {
    const double r_sq = radius * radius;
    const std::int64_t qx = coord(q.x());
    const std::int64_t qy = coord(q.y());
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        const auto it = cells_.find(pack(qx + dx, qy + dy));
        if (it == cells_.end()) {
          continue;
        }
        for (const std::int32_t i : it->second) {
          const Vec2& p = points_[i];
          const double ex = p.x() - q.x();
          const double ey = p.y() - q.y();
          if (ex * ex + ey * ey <= r_sq) {
            fn(static_cast<std::size_t>(i));
          }
        }
      }
    }
  }

 private:
  std::int64_t coord(double v) const { return static_cast<std::int64_t>(std::floor(v / cell_)); }

  static std::uint64_t pack(std::int64_t ix, std::int64_t iy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy));
  }

  std::uint64_t key_of(const Vec2& p) const { return pack(coord(p.x()), coord(p.y())); }

  const std::vector<Vec2>& points_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> cells_;
};

std::vector<Vec2> gaussian_step(const std::vector<Vec2>& current, const std::vector<Vec2>& anchors,
                                double sigma) {
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  std::vector<Vec2> next(current.size());
  detail::parallel_chunks(current.size(), 64, [&](std::size_t, std::size_t begin,
                                                  std::size_t end) {
    std::vector<double> exponents(anchors.size());
    for (std::size_t i = begin; i < end; ++i) {
      double max_exp = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < anchors.size(); ++j) {
        exponents[j] = -(current[i] - anchors[j]).squaredNorm() * inv_two_sigma_sq;
        max_exp = std::max(max_exp, exponents[j]);
      }
      // Shift by the largest exponent: the shared factor cancels in the
      // ratio, and the denominator can no longer underflow to zero.
      Vec2 weighted = Vec2::Zero();
      double total = 0.0;
      for (std::size_t j = 0; j < anchors.size(); ++j) {
        const double w = std::exp(exponents[j] - max_exp);
        weighted += w * anchors[j];
        total += w;
      }
      next[i] = weighted / total;
    }
  });
  return next;
}

std::vector<Vec2> flat_step(const std::vector<Vec2>& current, const std::vector<Vec2>& anchors,
                            double sigma) {
  const UniformGrid2 grid(anchors, sigma);
  std::vector<Vec2> next(current.size());
  detail::parallel_chunks(current.size(), 64, [&](std::size_t, std::size_t begin,
                                                  std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Vec2 sum = Vec2::Zero();
      std::size_t inside = 0;
      grid.for_each_in_ball(current[i], sigma, [&](std::size_t j) {
        sum += anchors[j];
        ++inside;
      });
      // No anchor in support: the update is undefined, keep the point.
      next[i] = inside > 0 ? Vec2(sum / static_cast<double>(inside)) : current[i];
    }
  });
  return next;
}

// Connected components of the "distance <= radius" graph (single linkage),
// labeled in first-appearance order of the lowest member index.
std::vector<int> link_clusters(const std::vector<Vec2>& points, double radius) {
  std::vector<int> parent(points.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  const UniformGrid2 grid(points, radius);
  for (std::size_t i = 0; i < points.size(); ++i) {
    grid.for_each_in_ball(points[i], radius, [&](std::size_t j) {
      const int ri = find(static_cast<int>(i));
      const int rj = find(static_cast<int>(j));
      if (ri != rj) {
        parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    });
  }
  std::vector<int> label(points.size(), -1);
  int next_label = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int root = find(static_cast<int>(i));
    if (label[root] < 0) {
      label[root] = next_label++;
    }
    label[i] = label[root];
  }
  return label;
}

struct WeightedModes {
  std::vector<Vec2> positions;
  std::vector<double> weights;
};

WeightedModes merge_once(const std::vector<Vec2>& points, const std::vector<double>& weights,
                         double radius) {
  const std::vector<int> label = link_clusters(points, radius);
  const int n_clusters = *std::max_element(label.begin(), label.end()) + 1;
  WeightedModes out;
  out.positions.assign(n_clusters, Vec2::Zero());
  out.weights.assign(n_clusters, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    out.positions[label[i]] += weights[i] * points[i];
    out.weights[label[i]] += weights[i];
  }
  for (int c = 0; c < n_clusters; ++c) {
    out.positions[c] /= out.weights[c];
  }
  return out;
}

}  // namespace

double kde_density(const Vec2& query, const DepthIntensityDataset& data, double sigma) {
  if (data.empty()) {
    throw EmptyInputError("kde_density: dataset is empty");
  }
  if (!(sigma > 0.0)) {
    throw ParameterError("kde_density: sigma must be positive");
  }
  double sum = 0.0;
  for (const Vec2& y : data.points) {
    sum += gaussian_kernel(query - y, sigma);
  }
  return sum / static_cast<double>(data.size());
}

std::vector<Vec2> mean_shift_step(const std::vector<Vec2>& current,
                                  const std::vector<Vec2>& anchors, const MeanShiftConfig& cfg) {
  cfg.validate();
  if (current.empty() || anchors.empty()) {
    throw EmptyInputError("mean_shift_step: empty point list");
  }
  return cfg.kernel == Kernel::kGaussian ? gaussian_step(current, anchors, cfg.bandwidth)
                                         : flat_step(current, anchors, cfg.bandwidth);
}

ModeSet run_mean_shift(const DepthIntensityDataset& data, const MeanShiftConfig& cfg,
                       MeanShiftStats* stats) {
  cfg.validate();
  if (data.empty()) {
    throw EmptyInputError("run_mean_shift: dataset is empty");
  }

  std::vector<Vec2> current = data.points;
  int iterations = 0;
  double relative_displacement = 0.0;
  for (int t = 0; t < cfg.max_iterations; ++t) {
    const std::vector<Vec2>& anchors =
        cfg.variant == MeanShiftVariant::kGms ? data.points : current;
    std::vector<Vec2> next = cfg.kernel == Kernel::kGaussian
                                 ? gaussian_step(current, anchors, cfg.bandwidth)
                                 : flat_step(current, anchors, cfg.bandwidth);
    double max_disp = 0.0;
    for (std::size_t i = 0; i < current.size(); ++i) {
      max_disp = std::max(max_disp, (next[i] - current[i]).norm());
    }
    current = std::move(next);
    ++iterations;
    relative_displacement = max_disp / cfg.bandwidth;
    if (relative_displacement < cfg.convergence_tol) {
      break;
    }
  }
  if (stats != nullptr) {
    stats->iterations = iterations;
    stats->last_relative_displacement = relative_displacement;
  }

  // Merge the converged iterate, then keep merging the cluster means until
  // every pair is separated by more than the merge radius.
  const double radius = cfg.merge_radius();
  WeightedModes merged = merge_once(current, std::vector<double>(current.size(), 1.0), radius);
  while (true) {
    WeightedModes again = merge_once(merged.positions, merged.weights, radius);
    if (again.positions.size() == merged.positions.size()) {
      break;
    }
    merged = std::move(again);
  }

  ModeSet result;
  result.modes = std::move(merged.positions);
  return result;
}

int estimate_num_components(const ImagePair& pair, const MeanShiftConfig& cfg) {
  cfg.validate();
  const DepthIntensityDataset data = extract_depth_intensity(pair, cfg.stride);
  return run_mean_shift(data, cfg).count();
}

namespace {

// Mean pairwise Gaussian kernel between two point sets: the inner product
// of their KDEs in closed form (each KDE has bandwidth sigma, so the
// pairwise kernel carries bandwidth sigma * sqrt(2)).
double cross_information_potential(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                                   double sigma) {
  const double pair_sigma = std::numbers::sqrt2 * sigma;
  double sum = 0.0;
  for (const Vec2& ai : a) {
    for (const Vec2& bj : b) {
      sum += gaussian_kernel(ai - bj, pair_sigma);
    }
  }
  return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

}  // namespace

PriDiagnostics pri_objective(const ModeSet& reduced, const DepthIntensityDataset& original,
                             double sigma) {
  if (reduced.modes.empty() || original.empty()) {
    throw EmptyInputError("pri_objective: empty point set");
  }
  if (!(sigma > 0.0)) {
    throw ParameterError("pri_objective: sigma must be positive");
  }
  const double ip_rr = cross_information_potential(reduced.modes, reduced.modes, sigma);
  const double ip_yy = cross_information_potential(original.points, original.points, sigma);
  const double ip_ry = cross_information_potential(reduced.modes, original.points, sigma);

  PriDiagnostics out;
  out.rqe = -std::log(ip_rr);
  out.csd = std::log(ip_rr) + std::log(ip_yy) - 2.0 * std::log(ip_ry);
  out.objective = out.rqe + out.csd;
  return out;
}

}  // namespace sogmm
