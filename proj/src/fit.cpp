#include "sogmm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sogmm/detail/parallel.hpp"
#include "sogmm/detail/random.hpp"
#include "sogmm/mean_shift.hpp"

namespace sogmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
// Responsibility mass below which a component is considered starved and
// reseeded at the lowest-density point.
constexpr double kEmptyComponentMass = 1e-10;

struct ComponentCache {
  Vec4 mean;
  Eigen::LLT<Mat4> chol;
  double log_norm = 0.0;    // -0.5 logdet(cov) - 2 log(2 pi)
  double log_weight = 0.0;

  double log_density(const Vec4& x) const {
    const Vec4 solved = chol.matrixL().solve(x - mean);
    return log_norm - 0.5 * solved.squaredNorm();
  }
};

ComponentCache make_cache(double weight, const Vec4& mean, const Mat4& cov, double floor_hint) {
  ComponentCache cache;
  cache.mean = mean;
  cache.chol.compute(cov);
  if (cache.chol.info() != Eigen::Success) {
    cache.chol.compute(cov + floor_hint * Mat4::Identity());
    if (cache.chol.info() != Eigen::Success) {
      throw NumericalError("em_fit: covariance factorization failed");
    }
  }
  const Mat4 lower = cache.chol.matrixL();
  double log_det = 0.0;
  for (int i = 0; i < 4; ++i) {
    log_det += std::log(lower(i, i));
  }
  cache.log_norm = -log_det - 2.0 * kLog2Pi;
  cache.log_weight = std::log(weight);
  return cache;
}

struct MixtureState {
  std::vector<double> weights;
  std::vector<Vec4> means;
  std::vector<Mat4> covariances;

  int size() const { return static_cast<int>(weights.size()); }
};

std::vector<ComponentCache> build_caches(const MixtureState& state, double floor_hint) {
  std::vector<ComponentCache> caches;
  caches.reserve(state.weights.size());
  for (int m = 0; m < state.size(); ++m) {
    caches.push_back(make_cache(state.weights[m], state.means[m], state.covariances[m], floor_hint));
  }
  return caches;
}

}  // namespace

void EmConfig::validate() const {
  if (max_iterations < 1) {
    throw ParameterError("em config: max_iterations must be >= 1");
  }
  if (!(loglik_rel_tol > 0.0)) {
    throw ParameterError("em config: loglik_rel_tol must be positive");
  }
  if (!(covariance_floor > 0.0)) {
    throw ParameterError("em config: covariance_floor must be positive");
  }
}

KInitResult kmeans_pp_seed(const PointCloud4& cloud, int m, std::uint64_t seed) {
  const std::size_t n = cloud.size();
  if (m < 1) {
    throw ParameterError("kmeans_pp_seed: m must be >= 1");
  }
  if (static_cast<std::size_t>(m) > n) {
    throw ParameterError("kmeans_pp_seed: m = " + std::to_string(m) + " exceeds cloud size " +
                         std::to_string(n));
  }

  detail::Rng rng(seed);
  KInitResult result;
  result.centroids.reserve(static_cast<std::size_t>(m));
  std::vector<char> taken(n, 0);

  const std::size_t first = rng.next_index(n);
  result.centroids.push_back(cloud.points[first]);
  taken[first] = 1;

  std::vector<double> dist_sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist_sq[i] = (cloud.points[i] - result.centroids[0]).squaredNorm();
  }

  while (result.centroids.size() < static_cast<std::size_t>(m)) {
    double total = 0.0;
    for (const double d : dist_sq) {
      total += d;
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = rng.next_double() * total;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cumulative += dist_sq[i];
        if (cumulative > r) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        // r landed on the cumulative boundary; take the last massive entry.
        for (std::size_t i = n; i-- > 0;) {
          if (dist_sq[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    }
    if (pick == n) {
      // All remaining points coincide with a centroid; fill by index.
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) {
          pick = i;
          break;
        }
      }
    }
    taken[pick] = 1;
    result.centroids.push_back(cloud.points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      dist_sq[i] = std::min(dist_sq[i], (cloud.points[i] - result.centroids.back()).squaredNorm());
    }
  }

  result.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double best_d = (cloud.points[i] - result.centroids[0]).squaredNorm();
    for (int c = 1; c < m; ++c) {
      const double d = (cloud.points[i] - result.centroids[c]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    result.assignment[i] = best;
  }
  return result;
}

Gmm4 em_fit(const PointCloud4& cloud, const KInitResult& init, const EmConfig& cfg,
            std::vector<double>* loglik_trace) {
  cfg.validate();
  const std::size_t n = cloud.size();
  const int n_comp = init.cluster_count();
  if (n_comp < 1) {
    throw ParameterError("em_fit: initialization has no clusters");
  }
  if (n <= static_cast<std::size_t>(n_comp)) {
    throw ParameterError("em_fit: need more points than components");
  }
  if (init.assignment.size() != n) {
    throw ParameterError("em_fit: assignment size does not match cloud");
  }
  for (const int a : init.assignment) {
    if (a < 0 || a >= n_comp) {
      throw ParameterError("em_fit: assignment index out of range");
    }
  }

  // Work on centered data; raw-moment accumulation stays well conditioned
  // and the shift is undone on output.
  Vec4 center = Vec4::Zero();
  for (const Vec4& p : cloud.points) {
    center += p;
  }
  center /= static_cast<double>(n);
  std::vector<Vec4> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = cloud.points[i] - center;
  }

  const Mat4 floor_term = cfg.covariance_floor * Mat4::Identity();
  Mat4 global_cov = Mat4::Zero();
  for (const Vec4& xi : x) {
    global_cov += xi * xi.transpose();
  }
  global_cov = global_cov / static_cast<double>(n) + floor_term;

  // Initial parameters from the hard partition.
  MixtureState state;
  state.weights.assign(n_comp, 0.0);
  state.means.assign(n_comp, Vec4::Zero());
  state.covariances.assign(n_comp, Mat4::Zero());
  std::vector<double> counts(n_comp, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    counts[init.assignment[i]] += 1.0;
    state.means[init.assignment[i]] += x[i];
  }
  for (int m = 0; m < n_comp; ++m) {
    if (counts[m] > 0.0) {
      state.means[m] /= counts[m];
    } else {
      state.means[m] = init.centroids[m] - center;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec4 d = x[i] - state.means[init.assignment[i]];
    state.covariances[init.assignment[i]] += d * d.transpose();
  }
  double weight_norm = 0.0;
  for (int m = 0; m < n_comp; ++m) {
    if (counts[m] > 0.0) {
      state.covariances[m] = state.covariances[m] / counts[m] + floor_term;
      state.weights[m] = counts[m];
    } else {
      state.covariances[m] = global_cov;
      state.weights[m] = 1.0;
    }
    weight_norm += state.weights[m];
  }
  for (double& w : state.weights) {
    w /= weight_norm;
  }

  // Per-chunk E-step partials. Chunks are a fixed decomposition of the
  // data, and the fold below runs in chunk order, so the fit is bitwise
  // reproducible whatever the worker count.
  struct ChunkStats {
    double loglik = 0.0;
    std::vector<double> mass;
    std::vector<Vec4> first_moment;
    std::vector<Mat4> second_moment;
  };
  constexpr std::size_t kChunkGrain = 256;
  std::vector<ChunkStats> chunk_stats((n + kChunkGrain - 1) / kChunkGrain);

  double prev_loglik = 0.0;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const std::vector<ComponentCache> caches = build_caches(state, cfg.covariance_floor);

    // E-step: accumulate responsibility-weighted moments in one pass.
    detail::parallel_chunks(n, kChunkGrain, [&](std::size_t chunk, std::size_t begin,
                                                std::size_t end) {
      ChunkStats& stats = chunk_stats[chunk];
      stats.loglik = 0.0;
      stats.mass.assign(n_comp, 0.0);
      stats.first_moment.assign(n_comp, Vec4::Zero());
      stats.second_moment.assign(n_comp, Mat4::Zero());
      std::vector<double> log_probs(n_comp);
      for (std::size_t i = begin; i < end; ++i) {
        double max_log = -std::numeric_limits<double>::infinity();
        for (int m = 0; m < n_comp; ++m) {
          log_probs[m] = caches[m].log_weight + caches[m].log_density(x[i]);
          max_log = std::max(max_log, log_probs[m]);
        }
        double sum_exp = 0.0;
        for (int m = 0; m < n_comp; ++m) {
          sum_exp += std::exp(log_probs[m] - max_log);
        }
        const double lse = max_log + std::log(sum_exp);
        stats.loglik += lse;
        for (int m = 0; m < n_comp; ++m) {
          const double r = std::exp(log_probs[m] - lse);
          stats.mass[m] += r;
          stats.first_moment[m] += r * x[i];
          stats.second_moment[m] += r * (x[i] * x[i].transpose());
        }
      }
    });

    std::vector<double> mass(n_comp, 0.0);
    std::vector<Vec4> first_moment(n_comp, Vec4::Zero());
    std::vector<Mat4> second_moment(n_comp, Mat4::Zero());
    double loglik = 0.0;
    for (const ChunkStats& stats : chunk_stats) {
      loglik += stats.loglik;
      for (int m = 0; m < n_comp; ++m) {
        mass[m] += stats.mass[m];
        first_moment[m] += stats.first_moment[m];
        second_moment[m] += stats.second_moment[m];
      }
    }
    if (!std::isfinite(loglik)) {
      throw NumericalError("em_fit: non-finite log-likelihood at iteration " +
                           std::to_string(iter + 1));
    }
    if (loglik_trace != nullptr) {
      loglik_trace->push_back(loglik);
    }
    if (iter > 0) {
      const double rel = (loglik - prev_loglik) / (std::abs(prev_loglik) + 1e-300);
      if (rel < cfg.loglik_rel_tol) {
        break;
      }
    }
    prev_loglik = loglik;

    // M-step.
    std::vector<int> starved;
    for (int m = 0; m < n_comp; ++m) {
      if (mass[m] < kEmptyComponentMass) {
        starved.push_back(m);
        continue;
      }
      state.weights[m] = mass[m] / static_cast<double>(n);
      state.means[m] = first_moment[m] / mass[m];
      Mat4 cov = second_moment[m] / mass[m] - state.means[m] * state.means[m].transpose();
      state.covariances[m] = cov + floor_term;
    }
    if (!starved.empty()) {
      // Reseed each starved component at the point the current model
      // explains worst.
      const std::vector<ComponentCache> updated = build_caches(state, cfg.covariance_floor);
      for (const int m : starved) {
        std::size_t worst = 0;
        double worst_log = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
          double max_log = -std::numeric_limits<double>::infinity();
          for (int c = 0; c < n_comp; ++c) {
            if (c == m) {
              continue;
            }
            max_log = std::max(max_log, updated[c].log_weight + updated[c].log_density(x[i]));
          }
          if (max_log < worst_log) {
            worst_log = max_log;
            worst = i;
          }
        }
        state.means[m] = x[worst];
        state.covariances[m] = global_cov;
        state.weights[m] = 1.0 / static_cast<double>(n);
      }
      double total = 0.0;
      for (const double w : state.weights) {
        total += w;
      }
      for (double& w : state.weights) {
        w /= total;
      }
    }
  }

  Gmm4 model;
  model.components.resize(n_comp);
  for (int m = 0; m < n_comp; ++m) {
    model.components[m].weight = state.weights[m];
    model.components[m].mean = state.means[m] + center;
    model.components[m].covariance = state.covariances[m];
  }
  return model;
}

Eigen::MatrixXd responsibilities(const Gmm4& model, const PointCloud4& cloud) {
  model.validate(1e-2);
  if (cloud.empty()) {
    throw EmptyInputError("responsibilities: cloud is empty");
  }
  double weight_sum = 0.0;
  for (const auto& c : model.components) {
    weight_sum += c.weight;
  }
  const int n_comp = model.size();
  std::vector<ComponentCache> caches;
  caches.reserve(static_cast<std::size_t>(n_comp));
  for (const auto& c : model.components) {
    caches.push_back(make_cache(c.weight / weight_sum, c.mean, c.covariance, 0.0));
  }
  Eigen::MatrixXd resp(cloud.size(), n_comp);
  std::vector<double> log_probs(n_comp);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double max_log = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < n_comp; ++m) {
      log_probs[m] = caches[m].log_weight + caches[m].log_density(cloud.points[i]);
      max_log = std::max(max_log, log_probs[m]);
    }
    double sum_exp = 0.0;
    for (int m = 0; m < n_comp; ++m) {
      sum_exp += std::exp(log_probs[m] - max_log);
    }
    const double lse = max_log + std::log(sum_exp);
    for (int m = 0; m < n_comp; ++m) {
      resp(static_cast<Eigen::Index>(i), m) = std::exp(log_probs[m] - lse);
    }
  }
  return resp;
}

Gmm4 fit_sogmm(const ImagePair& pair, const CameraIntrinsics& k, const MeanShiftConfig& ms_cfg,
               const EmConfig& em_cfg) {
  const int n_comp = estimate_num_components(pair, ms_cfg);
  const PointCloud4 cloud = depth_to_pointcloud(pair, k);
  if (cloud.size() <= static_cast<std::size_t>(n_comp)) {
    throw ParameterError("fit_sogmm: estimated " + std::to_string(n_comp) +
                         " components but only " + std::to_string(cloud.size()) +
                         " valid points");
  }
  const KInitResult init = kmeans_pp_seed(cloud, n_comp, em_cfg.rng_seed);
  return em_fit(cloud, init, em_cfg);
}

}  // namespace sogmm
