#include "sogmm/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sogmm/detail/kdtree.hpp"

namespace sogmm {

MaskB valid_depth_mask(const ImageD& depth) {
  return depth.array() > 0.0;
}

double psnr(const ImageD& reference, const ImageD& test, const MaskB& mask) {
  if (reference.rows() != test.rows() || reference.cols() != test.cols() ||
      reference.rows() != mask.rows() || reference.cols() != mask.cols()) {
    throw ParameterError("psnr: image and mask dimensions differ");
  }
  double error_sum = 0.0;
  std::uint64_t valid = 0;
  for (Eigen::Index v = 0; v < reference.rows(); ++v) {
    for (Eigen::Index u = 0; u < reference.cols(); ++u) {
      if (!mask(v, u)) {
        continue;
      }
      const double d = reference(v, u) - test(v, u);
      error_sum += d * d;
      ++valid;
    }
  }
  if (valid == 0) {
    throw ParameterError("psnr: mask selects no pixels");
  }
  const double mse = error_sum / static_cast<double>(valid);
  if (mse == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

double one_sided_mre(const std::vector<Eigen::Vector3d>& from, const detail::KdTree3& tree) {
  double total = 0.0;
  for (const auto& p : from) {
    total += std::sqrt(tree.nearest_squared(p));
  }
  return total / static_cast<double>(from.size());
}

std::vector<Eigen::Vector3d> spatial_points(const PointCloud4& cloud) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(cloud.size());
  for (const Vec4& p : cloud.points) {
    out.emplace_back(p(0), p(1), p(2));
  }
  return out;
}

}  // namespace

double mean_reconstruction_error(const PointCloud4& recon, const PointCloud4& truth,
                                 bool symmetric) {
  if (recon.empty() || truth.empty()) {
    throw EmptyInputError("mean_reconstruction_error: empty point cloud");
  }
  const std::vector<Eigen::Vector3d> recon_xyz = spatial_points(recon);
  const std::vector<Eigen::Vector3d> truth_xyz = spatial_points(truth);
  const detail::KdTree3 truth_tree(truth_xyz);
  const double forward = one_sided_mre(recon_xyz, truth_tree);
  if (!symmetric) {
    return forward;
  }
  const detail::KdTree3 recon_tree(recon_xyz);
  const double backward = one_sided_mre(truth_xyz, recon_tree);
  return 0.5 * (forward + backward);
}

std::uint64_t model_memory_bytes(std::uint64_t m, MemoryLayout layout) {
  const std::uint64_t floats_per_component = layout == MemoryLayout::kGmm4
                                                 ? 1 + 10 + 4   // weight, covariance, mean
                                                 : 1 + 3 + 6;   // intensity, mean, covariance
  return 4 * m * floats_per_component;
}

namespace {

std::string format_cell(double v) {
  if (std::isnan(v)) {
    return "";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

}  // namespace

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("write_report_csv: cannot open " + path);
  }
  out << "dataset,sigma,M,psnr_db,mre_m,mem_bytes,fit_ms\n";
  for (const ReportRow& r : rows) {
    out << r.dataset << ',' << format_cell(r.sigma) << ',' << r.components << ','
        << format_cell(r.psnr_db) << ',' << format_cell(r.mre_m) << ',' << r.mem_bytes << ','
        << format_cell(r.fit_ms) << '\n';
  }
  if (!out.good()) {
    throw IoError("write_report_csv: write failed for " + path);
  }
}

}  // namespace sogmm
