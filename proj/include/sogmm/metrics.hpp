#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sogmm/core.hpp"

namespace sogmm {

using MaskB = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Validity mask of a depth image: true where depth > 0.
MaskB valid_depth_mask(const ImageD& depth);

// Peak signal-to-noise ratio in dB over the masked pixels, with peak 1 for
// intensities in [0, 1]. Identical images return +infinity.
double psnr(const ImageD& reference, const ImageD& test, const MaskB& mask);

// Mean distance from each point of `recon` to its nearest neighbor in
// `truth`, spatial coordinates only. `symmetric` averages the two
// directions (Chamfer mean).
double mean_reconstruction_error(const PointCloud4& recon, const PointCloud4& truth,
                                 bool symmetric = false);

enum class MemoryLayout { kGmm4, kNdtCell };

// Serialized size of an m-component model: 4-byte floats times the
// parameter count per component (1 weight + 10 covariance + 4 mean for the
// 4D mixture; 1 + 3 + 6 for a normal-distributions voxel cell).
std::uint64_t model_memory_bytes(std::uint64_t m, MemoryLayout layout);

// Canonical evaluation report row. Fields that do not apply to a given run
// stay NaN and are written as empty cells.
struct ReportRow {
  std::string dataset;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  int components = 0;
  double psnr_db = std::numeric_limits<double>::quiet_NaN();
  double mre_m = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t mem_bytes = 0;
  double fit_ms = std::numeric_limits<double>::quiet_NaN();
};

// Writes "dataset,sigma,M,psnr_db,mre_m,mem_bytes,fit_ms" plus one row per
// entry. Infinite PSNR is written as "inf".
void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);

}  // namespace sogmm
