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
// Command-line front end: reblur, deblur, synth, gensequence, eval, gradcheck.
//
// Exit codes: 0 ok, 1 failed check, 2 usage or I/O error, 3 numeric abort.
// Error paths write only to stderr.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "reblur/gradcheck.hpp"
#include "reblur/io.hpp"
#include "reblur/metrics.hpp"
#include "reblur/parallel.hpp"
#include "reblur/reblur.hpp"
#include "reblur/solver.hpp"

#ifndef REBLUR_GRADCHECK_FAULT_SCALE
#define REBLUR_GRADCHECK_FAULT_SCALE 1.0
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

// Images written by the tool keep 16 bits so round trips lose little.
constexpr int kOutputBitDepth = 16;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw reblur::IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

json to_json(const reblur::LossReport& r) {
  return json{{"l_self", r.l_self},
              {"l_fwbw", r.l_fwbw},
              {"total", r.total},
              {"masked_pixel_counts",
               {{"self_a", r.masked_pixel_counts.self_a},
                {"self_b", r.masked_pixel_counts.self_b},
                {"fwbw_a", r.masked_pixel_counts.fwbw_a},
                {"fwbw_b", r.masked_pixel_counts.fwbw_b}}}};
}

reblur::Vec2 parse_velocity(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("velocity must be VX,VY");
  try {
    std::size_t used_x = 0, used_y = 0;
    const std::string sx = text.substr(0, comma), sy = text.substr(comma + 1);
    const double vx = std::stod(sx, &used_x);
    const double vy = std::stod(sy, &used_y);
    if (used_x != sx.size() || used_y != sy.size()) throw std::invalid_argument(text);
    return {vx, vy};
  } catch (const std::logic_error&) {
    throw UsageError("velocity must be VX,VY, got '" + text + "'");
  }
}

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw UsageError("size must be WxH");
  try {
    std::size_t used_w = 0, used_h = 0;
    const std::string sw = text.substr(0, x), sh = text.substr(x + 1);
    const int w = std::stoi(sw, &used_w);
    const int h = std::stoi(sh, &used_h);
    if (used_w != sw.size() || used_h != sh.size()) throw std::invalid_argument(text);
    return {w, h};
  } catch (const std::logic_error&) {
    throw UsageError("size must be WxH, got '" + text + "'");
  }
}

// ---- reblur ----------------------------------------------------------------

struct ReblurArgs {
  std::string sharp, flow, out, mask_out;
  int n = 8;
  std::optional<double> tau, dt;
};

int run_reblur(const ReblurArgs& a) {
  const reblur::Image sharp = reblur::load_image(a.sharp);
  reblur::FlowField flow = reblur::load_flow(a.flow);
  if (a.tau || a.dt) {
    if (!(a.tau && a.dt)) throw UsageError("--tau and --dt must be given together");
    const reblur::ReblurConfig config{a.n, *a.tau, *a.dt};
    config.validate();
    flow = reblur::scale_flow_to_exposure(flow, config);
  }
  const reblur::ReblurResult r = reblur::reblur(sharp, flow, a.n);
  reblur::save_image(a.out, r.blurred, kOutputBitDepth);
  if (!a.mask_out.empty()) {
    reblur::Image mask(r.mask.width(), r.mask.height(), 1,
                       std::vector<double>(r.mask.data().begin(), r.mask.data().end()));
    reblur::save_image(a.mask_out, mask, kOutputBitDepth);
  }
  return kExitOk;
}

// ---- deblur ----------------------------------------------------------------

struct DeblurArgs {
  std::string blur_a, blur_b, out_dir;
  reblur::SolverConfig config;
  bool verbose = false;
};

int run_deblur(const DeblurArgs& a) {
  const reblur::Image blur_a = reblur::load_image(a.blur_a);
  const reblur::Image blur_b = reblur::load_image(a.blur_b);
  fs::create_directories(a.out_dir);

  reblur::ProgressFn progress;
  if (a.verbose) {
    progress = [](int level, int iteration, const reblur::LossReport& r) {
      std::ostringstream line;
      line.precision(9);
      line << "level " << level << " iter " << iteration << " total " << r.total
           << " l_self " << r.l_self << " l_fwbw " << r.l_fwbw;
      std::cerr << line.str() << '\n';
    };
  }
  if (a.config.lambda == 0.0) {
    std::cerr << "warning: --lambda 0 disables the forward/backward term; "
                 "the flow is then only weakly constrained\n";
  }

  const auto start = std::chrono::steady_clock::now();
  const reblur::SolverState state = reblur::solve(blur_a, blur_b, a.config, progress);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path out(a.out_dir);
  reblur::save_image(out / "I_a.png", state.latent.sharp_a, kOutputBitDepth);
  reblur::save_image(out / "I_b.png", state.latent.sharp_b, kOutputBitDepth);
  reblur::save_flow(out / "flow_ab.flo", state.latent.flow_ab);
  reblur::save_flow(out / "flow_ba.flo", state.latent.flow_ba);

  const reblur::SolverConfig& c = a.config;
  json report;
  report["config"] = {{"iterations", c.iterations},
                      {"lambda", c.lambda},
                      {"half_window", c.half_window},
                      {"pyramid_levels", c.pyramid_levels},
                      {"seed", c.seed},
                      {"tv_weight_flow", c.tv_weight_flow},
                      {"step_size_image", c.step_size_image},
                      {"step_size_flow", c.step_size_flow},
                      {"exposure_ratio", c.exposure_ratio}};
  json history = json::array();
  for (const auto& r : state.loss_history) history.push_back(to_json(r));
  report["loss_history"] = std::move(history);
  report["objective_history"] = state.objective_history;
  json levels = json::array();
  for (const auto& level : state.level_histories) {
    json h = json::array();
    for (const auto& r : level) h.push_back(r.total);
    levels.push_back(std::move(h));
  }
  report["coarse_level_totals"] = std::move(levels);
  report["final"] = state.loss_history.empty() ? json() : to_json(state.loss_history.back());
  report["rejected_steps"] = state.rejected_steps;
  report["warnings"] = state.warnings;
  // Wall-clock time varies between runs, so it lives in its own file and
  // report.json stays reproducible.
  report["timings_file"] = "timings.json";
  write_json(out / "report.json", report);
  write_json(out / "timings.json",
             json{{"solve_seconds", seconds}, {"threads", reblur::num_threads()}});
  return kExitOk;
}

// ---- synth / gensequence -----------------------------------------------------

struct SynthArgs {
  std::string frames, out_dir;
  int window = 0;
  int stride = 0;
};

int run_synth(const SynthArgs& a) {
  const std::vector<reblur::Image> frames = reblur::load_frame_directory(a.frames);
  std::optional<reblur::Vec2> velocity;
  json source;
  const fs::path manifest = fs::path(a.frames) / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    try {
      source = json::parse(in);
    } catch (const json::exception& e) {
      throw reblur::IoError("cannot parse " + manifest.string() + ": " + e.what());
    }
    if (source.contains("velocity")) {
      velocity = reblur::Vec2{source["velocity"].at(0).get<double>(),
                              source["velocity"].at(1).get<double>()};
    }
  }
  const reblur::BlurPair pair = reblur::synthesize_blur_pair(frames, a.window, a.stride, velocity);
  const fs::path out(a.out_dir);
  fs::create_directories(out);
  reblur::save_image(out / "blur_a.png", pair.blur_a, kOutputBitDepth);
  reblur::save_image(out / "blur_b.png", pair.blur_b, kOutputBitDepth);
  reblur::save_image(out / "sharp_a.png", pair.sharp_a, kOutputBitDepth);
  reblur::save_image(out / "sharp_b.png", pair.sharp_b, kOutputBitDepth);
  json m{{"window", a.window}, {"stride", a.stride}, {"frames", frames.size()}};
  if (velocity) m["true_velocity"] = {velocity->x, velocity->y};
  write_json(out / "manifest.json", m);
  return kExitOk;
}

struct GenArgs {
  std::string pattern = "checkerboard", velocity = "1,0", size = "64x64", out_dir;
  int count = 9;
  std::uint64_t seed = 0;
};

int run_gensequence(const GenArgs& a) {
  reblur::SequenceSpec spec;
  try {
    spec.pattern = reblur::parse_pattern(a.pattern);
  } catch (const reblur::Error& e) {
    throw UsageError(e.what());
  }
  spec.velocity = parse_velocity(a.velocity);
  std::tie(spec.width, spec.height) = parse_size(a.size);
  spec.count = a.count;
  spec.seed = a.seed;
  const std::vector<reblur::Image> frames = reblur::generate_synthetic_sequence(spec);
  reblur::save_frame_directory(a.out_dir, frames);
  json m{{"pattern", reblur::pattern_name(spec.pattern)},
         {"velocity", {spec.velocity.x, spec.velocity.y}},
         {"count", spec.count},
         {"size", {spec.width, spec.height}},
         {"seed", spec.seed}};
  write_json(fs::path(a.out_dir) / "manifest.json", m);
  return kExitOk;
}

// ---- eval --------------------------------------------------------------------

struct EvalArgs {
  std::string ref, test, metric = "both";
};

int run_eval(const EvalArgs& a) {
  const reblur::Image ref = reblur::load_image(a.ref);
  const reblur::Image test = reblur::load_image(a.test);
  json j;
  if (a.metric == "psnr" || a.metric == "both") j["psnr"] = json_number(reblur::psnr(ref, test));
  if (a.metric == "ssim" || a.metric == "both") j["ssim"] = json_number(reblur::ssim(ref, test));
  std::cout << j.dump() << '\n';
  return kExitOk;
}

// ---- gradcheck -----------------------------------------------------------------

struct GradcheckArgs {
  std::uint64_t seed = 0;
  int trials = 100;
};

int run_gradcheck(const GradcheckArgs& a) {
  if (a.trials < 1) throw UsageError("--trials must be >= 1");
  reblur::GradcheckOptions options;
  options.seed = a.seed;
  options.trials = a.trials;
  options.fault_scale = REBLUR_GRADCHECK_FAULT_SCALE;
  const reblur::GradcheckReport report = reblur::run_gradcheck(options);
  json suites = json::array();
  for (const auto& s : report.suites) {
    suites.push_back({{"name", s.name},
                      {"pass", s.ok()},
                      {"tolerance", s.tolerance},
                      {"probed", s.probed},
                      {"excluded", s.excluded},
                      {"passed", s.passed},
                      {"pass_fraction", s.pass_fraction()},
                      {"max_relative_error", s.max_relative_error}});
  }
  json j{{"seed", a.seed}, {"trials", a.trials}, {"pass", report.ok()}, {"suites", suites}};
  std::cout << j.dump(2) << '\n';
  return report.ok() ? kExitOk : kExitCheckFailed;
}

int configure_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("REBLUR_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::logic_error&) {
    }
    throw UsageError(std::string("REBLUR_THREADS must be a positive integer, got '") + env + "'");
  }
  return 0;  // hardware default
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion-blur reblurring and variational deblurring"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: REBLUR_THREADS or hardware)")
      ->check(CLI::NonNegativeNumber);

  ReblurArgs rb;
  auto* reblur_cmd = app.add_subcommand("reblur", "Synthesize a blurry frame from a sharp one");
  reblur_cmd->add_option("--sharp", rb.sharp, "Sharp image (PNG)")->required();
  reblur_cmd->add_option("--flow", rb.flow, "Per-step flow (.flo)")->required();
  reblur_cmd->add_option("--n", rb.n, "Half window N")->required()->check(CLI::NonNegativeNumber);
  auto* tau_opt = reblur_cmd->add_option("--tau", rb.tau, "Exposure time; scales the flow");
  auto* dt_opt = reblur_cmd->add_option("--dt", rb.dt, "Frame interval; scales the flow");
  tau_opt->needs(dt_opt);
  dt_opt->needs(tau_opt);
  reblur_cmd->add_option("--out", rb.out, "Output image")->required();
  reblur_cmd->add_option("--mask-out", rb.mask_out, "Optional coverage product mask");

  DeblurArgs db;
  auto* deblur_cmd = app.add_subcommand("deblur", "Jointly recover sharp frames and flow");
  deblur_cmd->add_option("--blur-a", db.blur_a, "First blurry frame")->required();
  deblur_cmd->add_option("--blur-b", db.blur_b, "Second blurry frame")->required();
  deblur_cmd->add_option("--out-dir", db.out_dir, "Output directory")->required();
  deblur_cmd->add_option("--iters", db.config.iterations, "Iterations per pyramid level")
      ->capture_default_str();
  deblur_cmd->add_option("--lambda", db.config.lambda, "Forward/backward weight")
      ->capture_default_str();
  deblur_cmd->add_option("--n", db.config.half_window, "Half window N")->capture_default_str();
  deblur_cmd->add_option("--levels", db.config.pyramid_levels, "Pyramid levels")
      ->capture_default_str();
  deblur_cmd->add_option("--seed", db.config.seed, "Seed")->capture_default_str();
  deblur_cmd->add_option("--tv-flow", db.config.tv_weight_flow, "Flow smoothness weight")
      ->capture_default_str();
  deblur_cmd->add_flag("--verbose", db.verbose, "Log every iteration to stderr");

  SynthArgs sy;
  auto* synth_cmd = app.add_subcommand("synth", "Average frames into a blurry pair");
  synth_cmd->add_option("--frames", sy.frames, "Frame directory")->required();
  synth_cmd->add_option("--window", sy.window, "Frames per blurry image (odd)")->required();
  synth_cmd->add_option("--stride", sy.stride, "Frames between the two blurry images")
      ->required();
  synth_cmd->add_option("--out-dir", sy.out_dir, "Output directory")->required();

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gensequence", "Render a translating synthetic sequence");
  gen_cmd->add_option("--pattern", gen.pattern, "checkerboard, noise or ramp")
      ->capture_default_str();
  gen_cmd->add_option("--velocity", gen.velocity, "Pixels per frame, VX,VY")
      ->capture_default_str();
  gen_cmd->add_option("--count", gen.count, "Number of frames")->capture_default_str();
  gen_cmd->add_option("--size", gen.size, "Frame size WxH")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Noise seed")->capture_default_str();
  gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory")->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "PSNR and SSIM against a reference");
  eval_cmd->add_option("--ref", ev.ref, "Reference image")->required();
  eval_cmd->add_option("--test", ev.test, "Test image")->required();
  eval_cmd->add_option("--metric", ev.metric, "psnr, ssim or both")
      ->check(CLI::IsMember({"psnr", "ssim", "both"}))
      ->capture_default_str();

  GradcheckArgs gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference checks of all VJPs");
  gc_cmd->add_option("--seed", gc.seed, "Seed")->capture_default_str();
  gc_cmd->add_option("--trials", gc.trials, "Random instances per suite")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    reblur::set_num_threads(configure_threads(threads));
    if (*reblur_cmd) return run_reblur(rb);
    if (*deblur_cmd) return run_deblur(db);
    if (*synth_cmd) return run_synth(sy);
    if (*gen_cmd) return run_gensequence(gen);
    if (*eval_cmd) return run_eval(ev);
    if (*gc_cmd) return run_gradcheck(gc);
  } catch (const reblur::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
