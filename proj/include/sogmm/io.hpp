#pragma once

#include <string>
#include <utility>

#include "sogmm/core.hpp"

namespace sogmm {

// Binary model file: 12-byte header (magic "SGMM", version u8, dim u8,
// component count u16, bandwidth f32, all little-endian) followed by one
// 60-byte record per component: 15 f32 values — weight, mean[4], and the
// upper triangle of the covariance in row-major order.
inline constexpr char kModelMagic[4] = {'S', 'G', 'M', 'M'};
inline constexpr std::uint8_t kModelVersion = 1;
inline constexpr std::size_t kModelHeaderBytes = 12;
inline constexpr std::size_t kModelRecordBytes = 60;
inline constexpr std::size_t kModelMaxComponents = 65535;

// Reads a 16-bit single-channel depth image (PNG or PGM) and an
// 8- or 16-bit single-channel intensity image. Depth is divided by
// depth_scale to obtain meters; intensity is normalized by its bit-depth
// maximum.
ImagePair load_image_pair(const std::string& depth_path, const std::string& gray_path,
                          double depth_scale = 1000.0);

void save_model(const Gmm4& model, double sigma, const std::string& path);
std::pair<Gmm4, double> load_model(const std::string& path);

// Binary little-endian PLY with float x, y, z and uchar gray
// (round-half-up of g * 255).
void export_ply(const PointCloud4& cloud, const std::string& path);

}  // namespace sogmm
