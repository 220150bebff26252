// Command-line front end: fit a model from a depth/intensity image pair,
// sweep the bandwidth to inspect model-size behavior, resample a model into
// a point cloud, and evaluate reconstruction quality.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sogmm/core.hpp"
#include "sogmm/fit.hpp"
#include "sogmm/io.hpp"
#include "sogmm/mean_shift.hpp"
#include "sogmm/metrics.hpp"
#include "sogmm/reconstruct.hpp"
#include "sogmm/regress.hpp"

namespace {

struct IntrinsicsOption {
  std::string raw;

  sogmm::CameraIntrinsics parse() const {
    std::stringstream ss(raw);
    std::vector<double> vals;
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        vals.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw sogmm::ParameterError("--intrinsics: '" + item + "' is not a number");
      }
    }
    if (vals.size() != 4) {
      throw sogmm::ParameterError("--intrinsics expects fx,fy,cx,cy");
    }
    sogmm::CameraIntrinsics k{vals[0], vals[1], vals[2], vals[3]};
    k.validate();
    return k;
  }
};

sogmm::Kernel parse_kernel(const std::string& name) {
  if (name == "flat") {
    return sogmm::Kernel::kFlat;
  }
  if (name == "gaussian") {
    return sogmm::Kernel::kGaussian;
  }
  throw sogmm::ParameterError("--kernel must be flat or gaussian");
}

sogmm::MeanShiftVariant parse_variant(const std::string& name) {
  if (name == "gbms") {
    return sogmm::MeanShiftVariant::kGbms;
  }
  if (name == "gms") {
    return sogmm::MeanShiftVariant::kGms;
  }
  throw sogmm::ParameterError("--variant must be gbms or gms");
}

std::vector<double> parse_sigma_grid(const std::string& raw) {
  std::stringstream ss(raw);
  std::vector<double> grid;
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      grid.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw sogmm::ParameterError("--sigma-grid: '" + item + "' is not a number");
    }
  }
  if (grid.empty()) {
    throw sogmm::ParameterError("--sigma-grid is empty");
  }
  return grid;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

struct FitArgs {
  std::string depth_path;
  std::string gray_path;
  IntrinsicsOption intrinsics;
  double depth_scale = 1000.0;
  double sigma = 0.01;
  std::string kernel = "flat";
  std::string variant = "gbms";
  int stride = 1;
  std::uint64_t seed = 0;
  std::string out_path;
};

int run_fit(const FitArgs& args) {
  const sogmm::ImagePair pair =
      sogmm::load_image_pair(args.depth_path, args.gray_path, args.depth_scale);
  const sogmm::CameraIntrinsics k = args.intrinsics.parse();
  sogmm::MeanShiftConfig ms_cfg = sogmm::MeanShiftConfig::for_bandwidth(args.sigma);
  ms_cfg.kernel = parse_kernel(args.kernel);
  ms_cfg.variant = parse_variant(args.variant);
  ms_cfg.stride = args.stride;
  sogmm::EmConfig em_cfg;
  em_cfg.rng_seed = args.seed;

  const auto start = std::chrono::steady_clock::now();
  const sogmm::Gmm4 model = sogmm::fit_sogmm(pair, k, ms_cfg, em_cfg);
  const double fit_ms = elapsed_ms(start);

  sogmm::save_model(model, args.sigma, args.out_path);
  std::cout << model.size() << ',' << fit_ms << ','
            << sogmm::model_memory_bytes(static_cast<std::uint64_t>(model.size()),
                                         sogmm::MemoryLayout::kGmm4)
            << '\n';
  return 0;
}

struct ModesArgs {
  std::string depth_path;
  std::string gray_path;
  std::string sigma_grid;
  double depth_scale = 1000.0;
  std::string kernel = "flat";
  std::string variant = "gbms";
  int stride = 1;
  std::string out_path;
};

int run_modes(const ModesArgs& args) {
  const sogmm::ImagePair pair =
      sogmm::load_image_pair(args.depth_path, args.gray_path, args.depth_scale);
  const std::vector<double> grid = parse_sigma_grid(args.sigma_grid);

  std::ofstream out(args.out_path);
  if (!out) {
    throw sogmm::IoError("modes: cannot open " + args.out_path);
  }
  out << "sigma,M,iterations,wall_ms\n";
  for (const double sigma : grid) {
    sogmm::MeanShiftConfig cfg = sogmm::MeanShiftConfig::for_bandwidth(sigma);
    cfg.kernel = parse_kernel(args.kernel);
    cfg.variant = parse_variant(args.variant);
    cfg.stride = args.stride;
    const auto start = std::chrono::steady_clock::now();
    const sogmm::DepthIntensityDataset data = sogmm::extract_depth_intensity(pair, cfg.stride);
    sogmm::MeanShiftStats stats;
    const sogmm::ModeSet modes = sogmm::run_mean_shift(data, cfg, &stats);
    const double wall_ms = elapsed_ms(start);
    out << sigma << ',' << modes.count() << ',' << stats.iterations << ',' << wall_ms << '\n';
  }
  if (!out.good()) {
    throw sogmm::IoError("modes: write failed for " + args.out_path);
  }
  return 0;
}

struct ReconstructArgs {
  std::string model_path;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::string out_path;
};

int run_reconstruct(const ReconstructArgs& args) {
  const auto [model, sigma] = sogmm::load_model(args.model_path);
  (void)sigma;
  const sogmm::PointCloud4 cloud =
      sogmm::reconstruct(model, static_cast<std::size_t>(args.samples), args.seed);
  sogmm::export_ply(cloud, args.out_path);
  return 0;
}

struct EvalArgs {
  std::string model_path;
  std::string depth_path;
  std::string gray_path;
  IntrinsicsOption intrinsics;
  double depth_scale = 1000.0;
  std::uint64_t samples = 0;  // 0 = 3x the valid point count
  std::uint64_t seed = 0;
  bool symmetric_mre = false;
  std::string dataset;
  std::string out_path;
};

int run_eval(const EvalArgs& args) {
  const auto [model, sigma] = sogmm::load_model(args.model_path);
  const sogmm::ImagePair pair =
      sogmm::load_image_pair(args.depth_path, args.gray_path, args.depth_scale);
  const sogmm::CameraIntrinsics k = args.intrinsics.parse();

  const sogmm::ImageD regressed = sogmm::regress_image(model, k, pair.depth);
  const double psnr_db = sogmm::psnr(pair.gray, regressed, sogmm::valid_depth_mask(pair.depth));

  const sogmm::PointCloud4 truth = sogmm::depth_to_pointcloud(pair, k);
  const std::size_t n_samples =
      args.samples > 0 ? static_cast<std::size_t>(args.samples) : 3 * truth.size();
  const sogmm::PointCloud4 recon = sogmm::reconstruct(model, n_samples, args.seed);
  const double mre = sogmm::mean_reconstruction_error(recon, truth, args.symmetric_mre);

  sogmm::ReportRow row;
  row.dataset =
      args.dataset.empty() ? std::filesystem::path(args.depth_path).stem().string() : args.dataset;
  row.sigma = sigma;
  row.components = model.size();
  row.psnr_db = psnr_db;
  row.mre_m = mre;
  row.mem_bytes =
      sogmm::model_memory_bytes(static_cast<std::uint64_t>(model.size()), sogmm::MemoryLayout::kGmm4);
  sogmm::write_report_csv(args.out_path, {row});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-organizing Gaussian mixture modeling of depth-intensity image pairs"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand(
      "fit", "Fit a model; prints a 'M,fit_ms,mem_bytes' summary row to stdout");
  fit->add_option("--depth", fit_args.depth_path, "16-bit depth image (PNG or PGM)")->required();
  fit->add_option("--gray", fit_args.gray_path, "8/16-bit intensity image")->required();
  fit->add_option("--intrinsics", fit_args.intrinsics.raw, "fx,fy,cx,cy in pixels")->required();
  fit->add_option("--depth-scale", fit_args.depth_scale, "raw depth units per meter");
  fit->add_option("--sigma", fit_args.sigma, "mode-seeking bandwidth (default 0.01)");
  fit->add_option("--kernel", fit_args.kernel, "flat|gaussian");
  fit->add_option("--variant", fit_args.variant, "gbms|gms");
  fit->add_option("--stride", fit_args.stride, "pixel stride before mode seeking");
  fit->add_option("--seed", fit_args.seed, "rng seed for seeding/EM");
  fit->add_option("--out", fit_args.out_path, "output model file")->required();

  ModesArgs modes_args;
  auto* modes = app.add_subcommand(
      "modes", "Sweep bandwidths; writes 'sigma,M,iterations,wall_ms' CSV rows");
  modes->add_option("--depth", modes_args.depth_path, "16-bit depth image (PNG or PGM)")->required();
  modes->add_option("--gray", modes_args.gray_path, "8/16-bit intensity image")->required();
  modes->add_option("--sigma-grid", modes_args.sigma_grid, "comma-separated bandwidths")->required();
  modes->add_option("--depth-scale", modes_args.depth_scale, "raw depth units per meter");
  modes->add_option("--kernel", modes_args.kernel, "flat|gaussian");
  modes->add_option("--variant", modes_args.variant, "gbms|gms");
  modes->add_option("--stride", modes_args.stride, "pixel stride before mode seeking");
  modes->add_option("--out", modes_args.out_path, "output CSV file")->required();

  ReconstructArgs recon_args;
  auto* recon = app.add_subcommand("reconstruct", "Resample a model into a PLY point cloud");
  recon->add_option("--model", recon_args.model_path, "model file")->required();
  recon->add_option("--samples", recon_args.samples, "number of points to draw")
      ->required()
      ->check(CLI::PositiveNumber);
  recon->add_option("--seed", recon_args.seed, "rng seed");
  recon->add_option("--out", recon_args.out_path, "output PLY file")->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand(
      "eval",
      "Evaluate a model against an image pair; writes one CSV row with columns "
      "dataset,sigma,M,psnr_db,mre_m,mem_bytes,fit_ms (fit_ms empty here)");
  eval->add_option("--model", eval_args.model_path, "model file")->required();
  eval->add_option("--depth", eval_args.depth_path, "16-bit depth image (PNG or PGM)")->required();
  eval->add_option("--gray", eval_args.gray_path, "8/16-bit intensity image")->required();
  eval->add_option("--intrinsics", eval_args.intrinsics.raw, "fx,fy,cx,cy in pixels")->required();
  eval->add_option("--depth-scale", eval_args.depth_scale, "raw depth units per meter");
  eval->add_option("--samples", eval_args.samples,
                   "reconstruction sample count (default 3x the valid pixels)");
  eval->add_option("--seed", eval_args.seed, "rng seed for reconstruction");
  eval->add_flag("--symmetric-mre", eval_args.symmetric_mre,
                 "use the symmetric (Chamfer mean) reconstruction error");
  eval->add_option("--dataset", eval_args.dataset, "dataset label for the CSV row");
  eval->add_option("--out", eval_args.out_path, "output CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (fit->parsed()) {
      return run_fit(fit_args);
    }
    if (modes->parsed()) {
      return run_modes(modes_args);
    }
    if (recon->parsed()) {
      return run_reconstruct(recon_args);
    }
    return run_eval(eval_args);
  } catch (const sogmm::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const sogmm::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const sogmm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
