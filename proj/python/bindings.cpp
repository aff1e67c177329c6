/* Copyright 2026 The Reblur Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
// numpy <-> library conversions: images are H x W x C float64 (H x W is
// accepted as C = 1), flows H x W x 2, masks H x W.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>

#include "reblur/backward_warp.hpp"
#include "reblur/gradcheck.hpp"
#include "reblur/io.hpp"
#include "reblur/mesh_warp.hpp"
#include "reblur/metrics.hpp"
#include "reblur/occlusion.hpp"
#include "reblur/parallel.hpp"
#include "reblur/reblur.hpp"
#include "reblur/solver.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> copy_data(const Array& a) {
  return std::vector<double>(a.data(), a.data() + a.size());
}

reblur::Image to_image(const Array& a) {
  if (a.ndim() == 2) {
    return reblur::Image(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), 1,
                         copy_data(a));
  }
  if (a.ndim() != 3) throw reblur::ShapeError("image must be HxW or HxWxC");
  return reblur::Image(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                       static_cast<int>(a.shape(2)), copy_data(a));
}

reblur::FlowField to_flow(const Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 2) throw reblur::ShapeError("flow must be HxWx2");
  return reblur::FlowField(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                           copy_data(a));
}

Array from_raster(const reblur::Raster& r, bool squeeze_channels) {
  std::vector<py::ssize_t> shape{r.height(), r.width()};
  if (!squeeze_channels) shape.push_back(r.channels());
  Array out(shape);
  std::memcpy(out.mutable_data(), r.data().data(), r.size() * sizeof(double));
  return out;
}

Array from_image(const reblur::Image& image) { return from_raster(image, false); }
Array from_flow(const reblur::FlowField& flow) { return from_raster(flow, false); }
Array from_mask(const reblur::Mask& mask) { return from_raster(mask, true); }

py::dict loss_to_dict(const reblur::LossReport& r) {
  py::dict d;
  d["l_self"] = r.l_self;
  d["l_fwbw"] = r.l_fwbw;
  d["total"] = r.total;
  return d;
}

reblur::LatentPair to_latent(const Array& sharp_a, const Array& sharp_b,
                             const Array& flow_ab, const Array& flow_ba) {
  return reblur::LatentPair{to_image(sharp_a), to_image(sharp_b), to_flow(flow_ab),
                            to_flow(flow_ba)};
}

}  // namespace

PYBIND11_MODULE(_reblur, m) {
  m.doc() = "Warp-based motion-blur model and variational two-frame deblurring.";

  py::register_exception<reblur::Error>(m, "ReblurError", PyExc_ValueError);
  py::register_exception<reblur::NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("set_num_threads", &reblur::set_num_threads, py::arg("threads"));

  m.def(
      "forward_warp",
      [](const Array& src, const Array& flow) {
        const auto r = reblur::forward_warp(to_image(src), to_flow(flow));
        return py::make_tuple(from_image(r.image), from_mask(r.coverage));
      },
      py::arg("src"), py::arg("flow"),
      "Mesh-based forward warp; returns (image, coverage).");

  m.def(
      "backward_warp",
      [](const Array& src, const Array& flow) {
        const auto r = reblur::backward_warp(to_image(src), to_flow(flow));
        return py::make_tuple(from_image(r.warped), from_mask(r.valid));
      },
      py::arg("src"), py::arg("flow"), "Bilinear backward warp; returns (image, valid).");

  m.def(
      "reblur",
      [](const Array& sharp, const Array& step_flow, int n) {
        const auto r = reblur::reblur(to_image(sharp), to_flow(step_flow), n);
        return py::make_tuple(from_image(r.blurred), from_mask(r.mask));
      },
      py::arg("sharp"), py::arg("step_flow"), py::arg("n"),
      "Mean of forward warps by i * step_flow, i = -n..n; returns (blurred, mask).");

  m.def(
      "exposure_flow_scale",
      [](int n, double tau, double dt) {
        return reblur::exposure_flow_scale(reblur::ReblurConfig{n, tau, dt});
      },
      py::arg("n"), py::arg("tau"), py::arg("dt"));

  m.def(
      "reachability_mask",
      [](const Array& flow) { return from_mask(reblur::reachability_mask(to_flow(flow))); },
      py::arg("flow_from_other"));
  m.def(
      "self_consistency_mask",
      [](const Array& step_flow, int n) {
        return from_mask(reblur::self_consistency_mask(to_flow(step_flow), n));
      },
      py::arg("step_flow"), py::arg("n"));

  m.def(
      "total_loss",
      [](const Array& blur_a, const Array& blur_b, const Array& sharp_a, const Array& sharp_b,
         const Array& flow_ab, const Array& flow_ba, int n, double lambda_) {
        const auto r = reblur::total_loss(to_image(blur_a), to_image(blur_b),
                                          to_latent(sharp_a, sharp_b, flow_ab, flow_ba),
                                          reblur::ReblurConfig{n, 1.0, 1.0},
                                          reblur::LossConfig{lambda_});
        return loss_to_dict(r);
      },
      py::arg("blur_a"), py::arg("blur_b"), py::arg("sharp_a"), py::arg("sharp_b"),
      py::arg("flow_ab"), py::arg("flow_ba"), py::arg("n") = 8, py::arg("lambda_") = 2.0);

  m.def(
      "deblur",
      [](const Array& blur_a, const Array& blur_b, int iterations, double lambda_, int n,
         int levels) {
        reblur::SolverConfig config;
        config.iterations = iterations;
        config.lambda = lambda_;
        config.half_window = n;
        config.pyramid_levels = levels;
        reblur::SolverState state;
        {
          py::gil_scoped_release release;
          state = reblur::solve(to_image(blur_a), to_image(blur_b), config);
        }
        py::list history;
        for (const auto& r : state.loss_history) history.append(loss_to_dict(r));
        py::dict out;
        out["sharp_a"] = from_image(state.latent.sharp_a);
        out["sharp_b"] = from_image(state.latent.sharp_b);
        out["flow_ab"] = from_flow(state.latent.flow_ab);
        out["flow_ba"] = from_flow(state.latent.flow_ba);
        out["loss_history"] = history;
        out["warnings"] = state.warnings;
        return out;
      },
      py::arg("blur_a"), py::arg("blur_b"), py::arg("iterations") = 250,
      py::arg("lambda_") = 2.0, py::arg("n") = 8, py::arg("levels") = 3);

  m.def(
      "psnr", [](const Array& ref, const Array& test) {
        return reblur::psnr(to_image(ref), to_image(test));
      },
      py::arg("ref"), py::arg("test"));
  m.def(
      "ssim", [](const Array& a, const Array& b) { return reblur::ssim(to_image(a), to_image(b)); },
      py::arg("a"), py::arg("b"));

  m.def(
      "load_image", [](const std::string& path) { return from_image(reblur::load_image(path)); },
      py::arg("path"));
  m.def(
      "save_image",
      [](const std::string& path, const Array& image, int bit_depth) {
        reblur::save_image(path, to_image(image), bit_depth);
      },
      py::arg("path"), py::arg("image"), py::arg("bit_depth") = 8);
  m.def(
      "load_flow", [](const std::string& path) { return from_flow(reblur::load_flow(path)); },
      py::arg("path"));
  m.def(
      "save_flow",
      [](const std::string& path, const Array& flow) { reblur::save_flow(path, to_flow(flow)); },
      py::arg("path"), py::arg("flow"));

  m.def(
      "generate_synthetic_sequence",
      [](const std::string& pattern, int width, int height, std::pair<double, double> velocity,
         int count, std::uint64_t seed) {
        reblur::SequenceSpec spec;
        spec.pattern = reblur::parse_pattern(pattern);
        spec.width = width;
        spec.height = height;
        spec.velocity = {velocity.first, velocity.second};
        spec.count = count;
        spec.seed = seed;
        py::list frames;
        for (const auto& f : reblur::generate_synthetic_sequence(spec)) {
          frames.append(from_image(f));
        }
        return frames;
      },
      py::arg("pattern") = "checkerboard", py::arg("width") = 64, py::arg("height") = 64,
      py::arg("velocity") = std::make_pair(1.0, 0.0), py::arg("count") = 9,
      py::arg("seed") = 0);

  m.def(
      "synthesize_blur_pair",
      [](const std::vector<Array>& frames, int window, int stride) {
        std::vector<reblur::Image> images;
        images.reserve(frames.size());
        for (const auto& f : frames) images.push_back(to_image(f));
        const auto p = reblur::synthesize_blur_pair(images, window, stride);
        py::dict out;
        out["blur_a"] = from_image(p.blur_a);
        out["blur_b"] = from_image(p.blur_b);
        out["sharp_a"] = from_image(p.sharp_a);
        out["sharp_b"] = from_image(p.sharp_b);
        return out;
      },
      py::arg("frames"), py::arg("window"), py::arg("stride"));

  m.def(
      "gradcheck",
      [](std::uint64_t seed, int trials) {
        reblur::GradcheckOptions options;
        options.seed = seed;
        options.trials = trials;
        const auto report = reblur::run_gradcheck(options);
        py::dict out;
        py::list suites;
        for (const auto& s : report.suites) {
          py::dict d;
          d["name"] = s.name;
          d["pass"] = s.ok();
          d["pass_fraction"] = s.pass_fraction();
          d["max_relative_error"] = s.max_relative_error;
          suites.append(d);
        }
        out["pass"] = report.ok();
        out["suites"] = suites;
        return out;
      },
      py::arg("seed") = 0, py::arg("trials") = 10);
}
