#include "sogmm/io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace sogmm {

namespace {

void append_u16(std::vector<std::uint8_t>& buf, std::uint16_t v) {
  buf.push_back(static_cast<std::uint8_t>(v & 0xff));
  buf.push_back(static_cast<std::uint8_t>(v >> 8));
}

void append_f32(std::vector<std::uint8_t>& buf, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  buf.push_back(static_cast<std::uint8_t>(bits & 0xff));
  buf.push_back(static_cast<std::uint8_t>((bits >> 8) & 0xff));
  buf.push_back(static_cast<std::uint8_t>((bits >> 16) & 0xff));
  buf.push_back(static_cast<std::uint8_t>((bits >> 24) & 0xff));
}

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

float read_f32(const std::uint8_t* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

// Upper-triangle positions of a 4x4 symmetric matrix, row-major.
constexpr int kTriRow[10] = {0, 0, 0, 0, 1, 1, 1, 2, 2, 3};
constexpr int kTriCol[10] = {0, 1, 2, 3, 1, 2, 3, 2, 3, 3};

cv::Mat read_single_channel(const std::string& path) {
  cv::Mat img = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (img.empty()) {
    throw UnreadableFileError("load_image_pair: cannot read " + path);
  }
  if (img.channels() != 1) {
    throw UnsupportedFormatError("load_image_pair: " + path + " has " +
                                 std::to_string(img.channels()) + " channels, expected 1");
  }
  return img;
}

}  // namespace

ImagePair load_image_pair(const std::string& depth_path, const std::string& gray_path,
                          double depth_scale) {
  if (!(depth_scale > 0.0)) {
    throw ParameterError("load_image_pair: depth_scale must be positive");
  }
  const cv::Mat depth_raw = read_single_channel(depth_path);
  if (depth_raw.depth() != CV_16U) {
    throw UnsupportedFormatError("load_image_pair: " + depth_path +
                                 " must be 16-bit single-channel");
  }
  const cv::Mat gray_raw = read_single_channel(gray_path);
  if (gray_raw.depth() != CV_8U && gray_raw.depth() != CV_16U) {
    throw UnsupportedFormatError("load_image_pair: " + gray_path +
                                 " must be 8- or 16-bit single-channel");
  }
  if (depth_raw.rows != gray_raw.rows || depth_raw.cols != gray_raw.cols) {
    throw DimensionMismatchError("load_image_pair: depth is " + std::to_string(depth_raw.rows) +
                                 "x" + std::to_string(depth_raw.cols) + " but gray is " +
                                 std::to_string(gray_raw.rows) + "x" +
                                 std::to_string(gray_raw.cols));
  }

  ImagePair pair;
  pair.depth.resize(depth_raw.rows, depth_raw.cols);
  pair.gray.resize(gray_raw.rows, gray_raw.cols);
  for (int v = 0; v < depth_raw.rows; ++v) {
    for (int u = 0; u < depth_raw.cols; ++u) {
      pair.depth(v, u) = static_cast<double>(depth_raw.at<std::uint16_t>(v, u)) / depth_scale;
    }
  }
  const double gray_max = gray_raw.depth() == CV_8U ? 255.0 : 65535.0;
  for (int v = 0; v < gray_raw.rows; ++v) {
    for (int u = 0; u < gray_raw.cols; ++u) {
      const double raw = gray_raw.depth() == CV_8U
                             ? static_cast<double>(gray_raw.at<std::uint8_t>(v, u))
                             : static_cast<double>(gray_raw.at<std::uint16_t>(v, u));
      pair.gray(v, u) = raw / gray_max;
    }
  }
  pair.validate();
  return pair;
}

void save_model(const Gmm4& model, double sigma, const std::string& path) {
  model.validate(1e-2);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("save_model: sigma must be positive and finite");
  }
  if (model.components.size() > kModelMaxComponents) {
    throw ParameterError("save_model: component count " +
                         std::to_string(model.components.size()) + " exceeds format limit " +
                         std::to_string(kModelMaxComponents));
  }

  std::vector<std::uint8_t> buf;
  buf.reserve(kModelHeaderBytes + kModelRecordBytes * model.components.size());
  buf.insert(buf.end(), std::begin(kModelMagic), std::end(kModelMagic));
  buf.push_back(kModelVersion);
  buf.push_back(4);  // dimension
  append_u16(buf, static_cast<std::uint16_t>(model.components.size()));
  append_f32(buf, static_cast<float>(sigma));
  for (const auto& c : model.components) {
    append_f32(buf, static_cast<float>(c.weight));
    for (int i = 0; i < 4; ++i) {
      append_f32(buf, static_cast<float>(c.mean(i)));
    }
    for (int i = 0; i < 10; ++i) {
      append_f32(buf, static_cast<float>(c.covariance(kTriRow[i], kTriCol[i])));
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("save_model: cannot open " + path);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out.good()) {
    throw IoError("save_model: write failed for " + path);
  }
}

std::pair<Gmm4, double> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) {
    throw UnreadableFileError("load_model: cannot read " + path);
  }
  const auto file_size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> buf(file_size);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(file_size));
  if (!in.good()) {
    throw UnreadableFileError("load_model: read failed for " + path);
  }

  if (file_size < kModelHeaderBytes) {
    throw TruncatedFileError("load_model: file is " + std::to_string(file_size) +
                             " bytes, header needs " + std::to_string(kModelHeaderBytes));
  }
  if (std::memcmp(buf.data(), kModelMagic, 4) != 0) {
    throw BadMagicError("load_model: bad magic in " + path);
  }
  if (buf[4] != kModelVersion) {
    throw VersionMismatchError("load_model: version " + std::to_string(buf[4]) +
                               " unsupported, expected " + std::to_string(kModelVersion));
  }
  if (buf[5] != 4) {
    throw UnsupportedFormatError("load_model: dimension " + std::to_string(buf[5]) +
                                 " unsupported, expected 4");
  }
  const std::uint16_t count = read_u16(buf.data() + 6);
  if (count == 0) {
    throw UnsupportedFormatError("load_model: component count is zero");
  }
  const double sigma = static_cast<double>(read_f32(buf.data() + 8));
  const std::size_t expected = kModelHeaderBytes + kModelRecordBytes * count;
  if (file_size != expected) {
    throw TruncatedFileError("load_model: expected " + std::to_string(expected) +
                             " bytes for " + std::to_string(count) + " components, file has " +
                             std::to_string(file_size));
  }

  Gmm4 model;
  model.components.resize(count);
  const std::uint8_t* p = buf.data() + kModelHeaderBytes;
  for (std::uint16_t m = 0; m < count; ++m) {
    auto& c = model.components[m];
    c.weight = static_cast<double>(read_f32(p));
    p += 4;
    for (int i = 0; i < 4; ++i) {
      c.mean(i) = static_cast<double>(read_f32(p));
      p += 4;
    }
    for (int i = 0; i < 10; ++i) {
      const double value = static_cast<double>(read_f32(p));
      p += 4;
      c.covariance(kTriRow[i], kTriCol[i]) = value;
      c.covariance(kTriCol[i], kTriRow[i]) = value;
    }
    if (!(c.weight > 0.0) || !std::isfinite(c.weight) || !c.mean.allFinite() ||
        !c.covariance.allFinite()) {
      throw UnsupportedFormatError("load_model: component " + std::to_string(m) +
                                   " has invalid parameters");
    }
  }
  return {std::move(model), sigma};
}

void export_ply(const PointCloud4& cloud, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("export_ply: cannot open " + path);
  }
  out << "ply\n"
      << "format binary_little_endian 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "property uchar gray\n"
      << "end_header\n";
  std::vector<std::uint8_t> record;
  for (const Vec4& p : cloud.points) {
    record.clear();
    append_f32(record, static_cast<float>(p(0)));
    append_f32(record, static_cast<float>(p(1)));
    append_f32(record, static_cast<float>(p(2)));
    const double scaled = std::floor(p(3) * 255.0 + 0.5);
    record.push_back(static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0)));
    out.write(reinterpret_cast<const char*>(record.data()),
              static_cast<std::streamsize>(record.size()));
  }
  if (!out.good()) {
    throw IoError("export_ply: write failed for " + path);
  }
}

}  // namespace sogmm
