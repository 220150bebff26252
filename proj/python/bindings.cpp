#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "sogmm/core.hpp"
#include "sogmm/fit.hpp"
#include "sogmm/io.hpp"
#include "sogmm/mean_shift.hpp"
#include "sogmm/metrics.hpp"
#include "sogmm/reconstruct.hpp"
#include "sogmm/regress.hpp"

namespace py = pybind11;

namespace {

sogmm::ImagePair make_pair(const sogmm::ImageD& depth, const sogmm::ImageD& gray) {
  sogmm::ImagePair pair{depth, gray};
  pair.validate();
  return pair;
}

sogmm::CameraIntrinsics make_intrinsics(double fx, double fy, double cx, double cy) {
  sogmm::CameraIntrinsics k{fx, fy, cx, cy};
  k.validate();
  return k;
}

sogmm::MeanShiftConfig make_ms_config(double sigma, const std::string& kernel,
                                      const std::string& variant, int stride,
                                      int max_iterations, double convergence_tol,
                                      double mode_merge_radius) {
  sogmm::MeanShiftConfig cfg = sogmm::MeanShiftConfig::for_bandwidth(sigma);
  if (kernel == "flat") {
    cfg.kernel = sogmm::Kernel::kFlat;
  } else if (kernel == "gaussian") {
    cfg.kernel = sogmm::Kernel::kGaussian;
  } else {
    throw sogmm::ParameterError("kernel must be 'flat' or 'gaussian'");
  }
  if (variant == "gbms") {
    cfg.variant = sogmm::MeanShiftVariant::kGbms;
  } else if (variant == "gms") {
    cfg.variant = sogmm::MeanShiftVariant::kGms;
  } else {
    throw sogmm::ParameterError("variant must be 'gbms' or 'gms'");
  }
  cfg.stride = stride;
  cfg.max_iterations = max_iterations;
  cfg.convergence_tol = convergence_tol;
  if (mode_merge_radius > 0.0) {
    cfg.mode_merge_radius = mode_merge_radius;
  }
  cfg.validate();
  return cfg;
}

py::array_t<double> cloud_to_array(const sogmm::PointCloud4& cloud) {
  py::array_t<double> out({static_cast<py::ssize_t>(cloud.size()), py::ssize_t{4}});
  auto view = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < view.shape(0); ++i) {
    for (py::ssize_t j = 0; j < 4; ++j) {
      view(i, j) = cloud.points[static_cast<std::size_t>(i)](j);
    }
  }
  return out;
}

sogmm::PointCloud4 array_to_cloud(const py::array_t<double>& arr) {
  const auto view = arr.unchecked<2>();
  if (view.shape(1) != 4) {
    throw sogmm::ParameterError("point cloud array must have shape (n, 4)");
  }
  sogmm::PointCloud4 cloud;
  cloud.points.reserve(static_cast<std::size_t>(view.shape(0)));
  for (py::ssize_t i = 0; i < view.shape(0); ++i) {
    cloud.points.emplace_back(view(i, 0), view(i, 1), view(i, 2), view(i, 3));
  }
  return cloud;
}

sogmm::MemoryLayout parse_layout(const std::string& layout) {
  if (layout == "gmm4") {
    return sogmm::MemoryLayout::kGmm4;
  }
  if (layout == "ndt_cell") {
    return sogmm::MemoryLayout::kNdtCell;
  }
  throw sogmm::ParameterError("layout must be 'gmm4' or 'ndt_cell'");
}

}  // namespace

PYBIND11_MODULE(pysogmm, m) {
  m.doc() = "Self-organizing Gaussian mixture modeling of depth-intensity image pairs";

  py::register_exception<sogmm::ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<sogmm::IoError>(m, "IoError", PyExc_IOError);
  py::register_exception<sogmm::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<sogmm::Gmm4>(m, "Gmm4")
      .def(py::init([](const py::array_t<double>& weights, const py::array_t<double>& means,
                       const py::array_t<double>& covariances) {
             const auto w = weights.unchecked<1>();
             const auto mu = means.unchecked<2>();
             const auto cov = covariances.unchecked<3>();
             if (mu.shape(0) != w.shape(0) || cov.shape(0) != w.shape(0) || mu.shape(1) != 4 ||
                 cov.shape(1) != 4 || cov.shape(2) != 4) {
               throw sogmm::ParameterError(
                   "expected weights (m,), means (m, 4), covariances (m, 4, 4)");
             }
             sogmm::Gmm4 model;
             model.components.resize(static_cast<std::size_t>(w.shape(0)));
             for (py::ssize_t i = 0; i < w.shape(0); ++i) {
               auto& c = model.components[static_cast<std::size_t>(i)];
               c.weight = w(i);
               for (int r = 0; r < 4; ++r) {
                 c.mean(r) = mu(i, r);
                 for (int s = 0; s < 4; ++s) {
                   c.covariance(r, s) = cov(i, r, s);
                 }
               }
             }
             model.validate(1e-6);
             return model;
           }),
           py::arg("weights"), py::arg("means"), py::arg("covariances"))
      .def("__len__", [](const sogmm::Gmm4& g) { return g.components.size(); })
      .def_property_readonly("weights",
                             [](const sogmm::Gmm4& g) {
                               py::array_t<double> out(static_cast<py::ssize_t>(g.size()));
                               auto view = out.mutable_unchecked<1>();
                               for (py::ssize_t i = 0; i < view.shape(0); ++i) {
                                 view(i) = g.components[static_cast<std::size_t>(i)].weight;
                               }
                               return out;
                             })
      .def_property_readonly("means",
                             [](const sogmm::Gmm4& g) {
                               py::array_t<double> out(
                                   {static_cast<py::ssize_t>(g.size()), py::ssize_t{4}});
                               auto view = out.mutable_unchecked<2>();
                               for (py::ssize_t i = 0; i < view.shape(0); ++i) {
                                 for (py::ssize_t j = 0; j < 4; ++j) {
                                   view(i, j) = g.components[static_cast<std::size_t>(i)].mean(j);
                                 }
                               }
                               return out;
                             })
      .def_property_readonly("covariances", [](const sogmm::Gmm4& g) {
        py::array_t<double> out(
            {static_cast<py::ssize_t>(g.size()), py::ssize_t{4}, py::ssize_t{4}});
        auto view = out.mutable_unchecked<3>();
        for (py::ssize_t i = 0; i < view.shape(0); ++i) {
          for (py::ssize_t r = 0; r < 4; ++r) {
            for (py::ssize_t s = 0; s < 4; ++s) {
              view(i, r, s) = g.components[static_cast<std::size_t>(i)].covariance(r, s);
            }
          }
        }
        return out;
      });

  m.def(
      "depth_to_pointcloud",
      [](const sogmm::ImageD& depth, const sogmm::ImageD& gray, double fx, double fy, double cx,
         double cy) {
        return cloud_to_array(
            sogmm::depth_to_pointcloud(make_pair(depth, gray), make_intrinsics(fx, fy, cx, cy)));
      },
      py::arg("depth"), py::arg("gray"), py::arg("fx"), py::arg("fy"), py::arg("cx"),
      py::arg("cy"));

  m.def(
      "estimate_num_components",
      [](const sogmm::ImageD& depth, const sogmm::ImageD& gray, double sigma,
         const std::string& kernel, const std::string& variant, int stride, int max_iterations,
         double convergence_tol, double mode_merge_radius) {
        return sogmm::estimate_num_components(
            make_pair(depth, gray), make_ms_config(sigma, kernel, variant, stride, max_iterations,
                                                   convergence_tol, mode_merge_radius));
      },
      py::arg("depth"), py::arg("gray"), py::arg("sigma"), py::arg("kernel") = "flat",
      py::arg("variant") = "gbms", py::arg("stride") = 1, py::arg("max_iterations") = 100,
      py::arg("convergence_tol") = 1e-4, py::arg("mode_merge_radius") = 0.0);

  m.def(
      "fit",
      [](const sogmm::ImageD& depth, const sogmm::ImageD& gray, double fx, double fy, double cx,
         double cy, double sigma, const std::string& kernel, const std::string& variant,
         int stride, std::uint64_t seed, int em_max_iterations, double em_tol,
         double covariance_floor) {
        sogmm::EmConfig em_cfg;
        em_cfg.rng_seed = seed;
        em_cfg.max_iterations = em_max_iterations;
        em_cfg.loglik_rel_tol = em_tol;
        em_cfg.covariance_floor = covariance_floor;
        return sogmm::fit_sogmm(make_pair(depth, gray), make_intrinsics(fx, fy, cx, cy),
                                make_ms_config(sigma, kernel, variant, stride, 100, 1e-4, 0.0),
                                em_cfg);
      },
      py::arg("depth"), py::arg("gray"), py::arg("fx"), py::arg("fy"), py::arg("cx"),
      py::arg("cy"), py::arg("sigma") = 0.01, py::arg("kernel") = "flat",
      py::arg("variant") = "gbms", py::arg("stride") = 1, py::arg("seed") = 0,
      py::arg("em_max_iterations") = 100, py::arg("em_tol") = 1e-6,
      py::arg("covariance_floor") = 1e-6);

  m.def(
      "regress_image",
      [](const sogmm::Gmm4& model, const sogmm::ImageD& depth, double fx, double fy, double cx,
         double cy) { return sogmm::regress_image(model, make_intrinsics(fx, fy, cx, cy), depth); },
      py::arg("model"), py::arg("depth"), py::arg("fx"), py::arg("fy"), py::arg("cx"),
      py::arg("cy"));

  m.def(
      "expected_intensity",
      [](const sogmm::Gmm4& model, const sogmm::Vec3& x) {
        return sogmm::expected_intensity(model, x);
      },
      py::arg("model"), py::arg("x"));

  m.def(
      "conditional_intensity_density",
      [](const sogmm::Gmm4& model, const sogmm::Vec3& x, double g) {
        return sogmm::conditional_intensity_density(model, x, g);
      },
      py::arg("model"), py::arg("x"), py::arg("g"));

  m.def(
      "sample",
      [](const sogmm::Gmm4& model, std::size_t n, std::uint64_t seed) {
        return cloud_to_array(sogmm::sample_gmm(model, n, seed));
      },
      py::arg("model"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "reconstruct",
      [](const sogmm::Gmm4& model, std::size_t n, std::uint64_t seed) {
        return cloud_to_array(sogmm::reconstruct(model, n, seed));
      },
      py::arg("model"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "save_model",
      [](const sogmm::Gmm4& model, double sigma, const std::string& path) {
        sogmm::save_model(model, sigma, path);
      },
      py::arg("model"), py::arg("sigma"), py::arg("path"));

  m.def(
      "load_model",
      [](const std::string& path) {
        auto [model, sigma] = sogmm::load_model(path);
        return py::make_tuple(std::move(model), sigma);
      },
      py::arg("path"));

  m.def(
      "export_ply",
      [](const py::array_t<double>& cloud, const std::string& path) {
        sogmm::export_ply(array_to_cloud(cloud), path);
      },
      py::arg("cloud"), py::arg("path"));

  m.def(
      "psnr",
      [](const sogmm::ImageD& reference, const sogmm::ImageD& test, const sogmm::ImageD& mask) {
        return sogmm::psnr(reference, test, mask.array() > 0.0);
      },
      py::arg("reference"), py::arg("test"), py::arg("mask"));

  m.def(
      "mean_reconstruction_error",
      [](const py::array_t<double>& recon, const py::array_t<double>& truth, bool symmetric) {
        return sogmm::mean_reconstruction_error(array_to_cloud(recon), array_to_cloud(truth),
                                                symmetric);
      },
      py::arg("recon"), py::arg("truth"), py::arg("symmetric") = false);

  m.def(
      "model_memory_bytes",
      [](std::uint64_t m_components, const std::string& layout) {
        return sogmm::model_memory_bytes(m_components, parse_layout(layout));
      },
      py::arg("m"), py::arg("layout") = "gmm4");

  m.def(
      "run_mean_shift",
      [](const py::array_t<double>& points, double sigma, const std::string& kernel,
         const std::string& variant, int max_iterations, double convergence_tol,
         double mode_merge_radius) {
        const auto view = points.unchecked<2>();
        if (view.shape(1) != 2) {
          throw sogmm::ParameterError("mean shift points must have shape (n, 2)");
        }
        sogmm::DepthIntensityDataset data;
        data.points.reserve(static_cast<std::size_t>(view.shape(0)));
        for (py::ssize_t i = 0; i < view.shape(0); ++i) {
          data.points.emplace_back(view(i, 0), view(i, 1));
        }
        const sogmm::ModeSet modes = sogmm::run_mean_shift(
            data, make_ms_config(sigma, kernel, variant, 1, max_iterations, convergence_tol,
                                 mode_merge_radius));
        py::array_t<double> out({static_cast<py::ssize_t>(modes.modes.size()), py::ssize_t{2}});
        auto mv = out.mutable_unchecked<2>();
        for (py::ssize_t i = 0; i < mv.shape(0); ++i) {
          mv(i, 0) = modes.modes[static_cast<std::size_t>(i)].x();
          mv(i, 1) = modes.modes[static_cast<std::size_t>(i)].y();
        }
        return out;
      },
      py::arg("points"), py::arg("sigma"), py::arg("kernel") = "flat",
      py::arg("variant") = "gbms", py::arg("max_iterations") = 100,
      py::arg("convergence_tol") = 1e-4, py::arg("mode_merge_radius") = 0.0);
}
