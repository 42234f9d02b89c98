// flatcam: simulate and reconstruct multi-depth scenes for mask-based lensless
// cameras.
//
// Exit codes: 0 success, 1 validation/usage error, 2 I/O or format error.

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "flatcam/config.hpp"
#include "flatcam/errors.hpp"
#include "flatcam/io.hpp"
#include "flatcam/pursuit.hpp"
#include "flatcam/scene_sim.hpp"
#include "flatcam/sweep.hpp"

namespace fs = std::filesystem;
using namespace flatcam;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;  // "section.key=value"

  // convenience flags; each maps onto one config key
  std::optional<int> features;
  std::optional<double> mask_pitch;
  std::optional<std::uint64_t> seed;
  std::optional<int> symmetric;
  std::string depth_count;  // K, or a K list for sweep
  std::optional<int> n_pixels;
  std::optional<int> sensor_pixels;
  std::optional<double> snr_db;
  std::string cameras;  // camera count, or a list for sweep
  std::optional<int> trials;

  std::string mask_in;
  std::string scene_in;
  std::string meas_in;
  std::string truth_in;
  std::string intensity_in;
  std::string depth_in;
  std::string out;
  std::string out_dir;
  std::string pgm;
  std::string summary;
  int depth_index = -1;
  std::optional<double> ridge;
  int timing = 1;
};

int parse_count(const std::string& text, const char* flag) {
  int value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || value < 1)
    throw ValidationError(std::string(flag) + " expects a positive integer, got '" + text + "'");
  return value;
}

ExperimentConfig load_config(const Options& o, const std::string& command) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : parse_config(read_file(o.config_path));
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects section.key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.features) cfg.mask.features = *o.features;
  if (o.mask_pitch) cfg.mask.pitch = *o.mask_pitch;
  if (o.symmetric) cfg.mask.symmetric = *o.symmetric != 0;
  if (o.seed) {
    if (command == "gen-mask")
      cfg.mask.seed = *o.seed;
    else if (command == "gen-scene")
      cfg.scene.seed = *o.seed;
    else if (command == "simulate")
      cfg.noise.seed = *o.seed;
    else
      cfg.sweep.seed = *o.seed;
  }
  if (!o.depth_count.empty()) set_config_value(cfg, command == "sweep" ? "sweep.K" : "depth.K", o.depth_count);
  if (o.n_pixels) cfg.scene.n_pixels = *o.n_pixels;
  if (o.sensor_pixels) cfg.geometry.sensor_pixels = *o.sensor_pixels;
  if (o.snr_db) cfg.noise.snr_db = *o.snr_db;
  if (!o.cameras.empty()) {
    if (command == "sweep") {
      set_config_value(cfg, "sweep.cameras", o.cameras);
    } else {
      const int n = parse_count(o.cameras, "--cameras");
      cfg.rig = {};
      cfg.rig.yaw_deg.clear();
      for (const auto& pose : convex_rig(n, cfg.sweep.yaw_step_deg))
        cfg.rig.yaw_deg.push_back(pose.yaw * 180.0 / std::numbers::pi);
    }
  }
  if (o.trials) cfg.sweep.trials = *o.trials;
  cfg.validate();
  return cfg;
}

void print_resolved(const ExperimentConfig& cfg) {
  std::cout << "# resolved config\n" << serialize_config(resolve_defaults(cfg));
  std::cout << "# seeds: mask " << cfg.mask.seed << ", scene " << cfg.scene.seed << ", noise " << cfg.noise.seed
            << ", master " << cfg.sweep.seed << "\n";
}

fs::path output_path(const ExperimentConfig& cfg, const std::string& given, const char* fallback) {
  if (!given.empty()) return given;
  return fs::path(cfg.output_dir) / fallback;
}

// Mask from file when given, else generated from the config.
MaskSpec load_mask(const Options& o, const Experiment& e) { return o.mask_in.empty() ? e.mask : read_mask(o.mask_in); }

SeparableOperator make_operator(const Options& o, const Experiment& e) {
  return build_operator(e.rig(), load_mask(o, e), e.depths, e.grid);
}

void require_path(const std::string& value, const char* flag) {
  if (value.empty()) throw ValidationError(std::string(flag) + " is required");
}

void print_psnr(const char* label, double value) {
  if (std::isinf(value))
    std::printf("%s: inf (exact)\n", label);
  else
    std::printf("%s: %.3f dB\n", label, value);
}

int cmd_gen_mask(const Options& o, const ExperimentConfig& cfg) {
  const Experiment e = make_experiment(cfg);
  const fs::path out = output_path(cfg, o.out, "mask.fcmask");
  write_mask(out, e.mask);
  std::printf("wrote %s (%zu features, %zu open)\n", out.c_str(), e.mask.bits.size(), e.mask.ones());
  return 0;
}

int cmd_gen_scene(const Options& o, const ExperimentConfig& cfg) {
  const Experiment e = make_experiment(cfg);
  const SceneVolume scene = generate_cards_scene(cfg.scene_spec(), e.depths);
  const fs::path out = output_path(cfg, o.out, "scene.fcvol");
  write_volume(out, scene);
  const Matrix composite = scene.collapse();
  if (!o.pgm.empty()) write_pgm(o.pgm, composite, composite.maxCoeff());
  std::printf("wrote %s (%dx%dx%d)\n", out.c_str(), scene.nx(), scene.ny(), scene.n_depths());
  return 0;
}

int cmd_build_op(const Options& o, const ExperimentConfig& cfg) {
  const Experiment e = make_experiment(cfg);
  const SeparableOperator op = make_operator(o, e);
  const fs::path dir = o.out_dir.empty() ? fs::path(cfg.output_dir) / "operator" : fs::path(o.out_dir);
  fs::create_directories(dir);
  std::string depths = "k,depth_mm,slope\n";
  for (int k = 0; k < op.n_depths(); ++k) {
    char line[128];
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n", k, op.depths().depths[static_cast<std::size_t>(k)],
                  op.depths().slopes[static_cast<std::size_t>(k)]);
    depths += line;
    for (int c = 0; c < op.n_cameras(); ++c) {
      const std::string stem = "phi_c" + std::to_string(c) + "_k" + std::to_string(k);
      write_matrix(dir / (stem + "_x.fcmat"), op.phi(c, k).x);
      write_matrix(dir / (stem + "_y.fcmat"), op.phi(c, k).y);
    }
  }
  write_file(dir / "depths.csv", depths);
  std::printf("wrote %d cameras x %d depths of %dx%d matrices to %s\n", op.n_cameras(), op.n_depths(),
              op.n_sensor(0), op.n_angles(), dir.c_str());
  return 0;
}

int cmd_simulate(const Options& o, const ExperimentConfig& cfg) {
  require_path(o.scene_in, "--scene");
  const Experiment e = make_experiment(cfg);
  const SeparableOperator op = make_operator(o, e);
  const SceneVolume scene = read_volume(o.scene_in);
  if (!is_valid_scene(scene)) throw ValidationError("scene must be nonnegative with one depth per pixel");
  const Measurements meas = simulate_measurements(op, scene, cfg.noise_spec());
  const fs::path out = output_path(cfg, o.out, "measurements.fcvol");
  write_file(out, encode_measurements(meas));
  std::printf("wrote %s (%d cameras)\n", out.c_str(), op.n_cameras());
  return 0;
}

int cmd_reconstruct(const Options& o, const ExperimentConfig& cfg) {
  require_path(o.meas_in, "--meas");
  const Experiment e = make_experiment(cfg);
  const SeparableOperator op = make_operator(o, e);
  const Measurements meas = decode_measurements(read_file(o.meas_in));
  const ReconstructionResult result = depth_pursuit(op, meas, cfg.pursuit());

  const fs::path dir = o.out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(o.out_dir);
  fs::create_directories(dir);
  write_file(dir / "depth_map.fcmat", encode_depth_map(result.depth_map));
  write_matrix(dir / "intensity.fcmat", result.intensity);
  write_file(dir / "residuals.csv", encode_residual_csv(result.residuals));
  write_pgm(dir / "intensity.pgm", result.intensity, std::max(result.intensity.maxCoeff(), 0.0));

  std::printf("iterations: %d (%s), cg iterations: %d\n", result.iterations,
              result.converged ? "converged" : "budget reached", result.cg_iterations);
  std::printf("residuals:");
  for (double r : result.residuals) std::printf(" %.6g", r);
  std::printf("\n");
  if (!o.truth_in.empty()) {
    const SceneVolume truth = read_volume(o.truth_in);
    const Matrix composite = truth.collapse();
    print_psnr("psnr", psnr(composite, result.intensity));
    if (const auto view = truth.structured())
      std::printf("depth accuracy: %.6f\n", depth_accuracy(view->depth_map, result.depth_map, active_pixels(composite)));
  }
  std::printf("wrote %s\n", dir.c_str());
  return 0;
}

int cmd_baseline(const Options& o, const ExperimentConfig& cfg) {
  require_path(o.meas_in, "--meas");
  const Experiment e = make_experiment(cfg);
  const SeparableOperator op = make_operator(o, e);
  const Measurements meas = decode_measurements(read_file(o.meas_in));
  std::optional<Matrix> composite;
  if (!o.truth_in.empty()) composite = read_volume(o.truth_in).collapse();

  std::vector<int> indices;
  if (o.depth_index >= 0) {
    indices.push_back(o.depth_index);
  } else {
    for (int k = 0; k < op.n_depths(); ++k) indices.push_back(k);
  }
  int best_index = indices.front();
  double best_psnr = -std::numeric_limits<double>::infinity();
  Matrix best;
  for (int k : indices) {
    const FixedDepthResult r = fixed_depth_reconstruct(op, meas, k, o.ridge, cfg.pursuit());
    std::printf("depth %d (%.3f mm): ridge %.3g, cg %d%s", k, op.depths().depths[static_cast<std::size_t>(k)], r.ridge,
                r.iterations, r.converged ? "" : " (not converged)");
    double score = -static_cast<double>(k);  // without truth keep the first
    if (composite) {
      score = psnr(*composite, r.intensity);
      std::printf(", psnr %.3f dB", score);
    }
    std::printf("\n");
    if (best.size() == 0 || score > best_psnr) {
      best_psnr = score;
      best_index = k;
      best = r.intensity;
    }
  }
  const fs::path out = output_path(cfg, o.out, "baseline_intensity.fcmat");
  write_matrix(out, best);
  std::printf("selected depth %d; wrote %s\n", best_index, out.c_str());
  return 0;
}

int cmd_evaluate(const Options& o, const ExperimentConfig&) {
  require_path(o.truth_in, "--truth");
  require_path(o.intensity_in, "--intensity");
  const SceneVolume truth = read_volume(o.truth_in);
  const Matrix composite = truth.collapse();
  const Matrix estimate = read_matrix(o.intensity_in);
  print_psnr("psnr", psnr(composite, estimate));
  if (!o.depth_in.empty()) {
    const auto view = truth.structured();
    if (!view) throw ValidationError("truth volume has more than one depth per pixel");
    std::printf("depth accuracy: %.6f\n",
                depth_accuracy(view->depth_map, decode_depth_map(read_file(o.depth_in)), active_pixels(composite)));
  }
  return 0;
}

int cmd_sweep(const Options& o, const ExperimentConfig& cfg) {
  const auto records = run_sweep(cfg, sweep_threads_from_env());
  const fs::path out = output_path(cfg, o.out, "sweep.csv");
  write_file(out, sweep_csv(records, o.timing != 0));
  const std::string table = sweep_summary_markdown(records);
  if (!o.summary.empty()) write_file(o.summary, table);
  std::size_t failures = 0;
  for (const auto& r : records)
    if (!r.error.empty()) {
      ++failures;
      std::fprintf(stderr, "trial K=%d cameras=%d #%d failed: %s\n", r.depth_count, r.cameras, r.trial, r.error.c_str());
    }
  std::printf("%zu trials (%zu failed); wrote %s\n\nMean PSNR (dB)\n\n%s", records.size(), failures, out.c_str(),
              table.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth and intensity reconstruction for mask-based lensless cameras"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Config file (section.key = value lines)");
    sub->add_option("--set", o.overrides, "Override a config key: section.key=value");
    sub->add_option("--K", o.depth_count, "Number of depth planes (depth.K); a list for sweep (sweep.K)");
    sub->add_option("--N", o.n_pixels, "Scene pixels per axis (scene.n_pixels)");
    sub->add_option("--M", o.sensor_pixels, "Sensor pixels per axis (geometry.sensor_pixels)");
    sub->add_option("--cameras", o.cameras, "Convex rig of this many cameras (rig.yaw_deg); a list for sweep");
  };

  auto mask_input = [&](CLI::App* sub) {
    sub->add_option("--mask", o.mask_in, "Mask file (FCMASK); generated from the config if omitted");
  };

  auto* gen_mask = app.add_subcommand("gen-mask", "Generate a pseudorandom binary mask");
  common(gen_mask);
  gen_mask->add_option("--features", o.features, "Number of mask features (mask.features)");
  gen_mask->add_option("--pitch", o.mask_pitch, "Feature pitch in mm (mask.pitch_mm)");
  gen_mask->add_option("--seed", o.seed, "Mask seed (mask.seed)");
  gen_mask->add_option("--symmetric", o.symmetric, "Mirror the pattern (0/1)");
  gen_mask->add_option("--out", o.out, "Output FCMASK path");

  auto* gen_scene = app.add_subcommand("gen-scene", "Generate a random multi-plane card scene");
  common(gen_scene);
  gen_scene->add_option("--seed", o.seed, "Scene seed (scene.seed)");
  gen_scene->add_option("--out", o.out, "Output FCVOL path");
  gen_scene->add_option("--pgm", o.pgm, "Also write a PGM preview of the composite image");

  auto* build_op = app.add_subcommand("build-op", "Write the per-camera, per-depth system matrices");
  common(build_op);
  mask_input(build_op);
  build_op->add_option("--out-dir", o.out_dir, "Output directory");

  auto* simulate = app.add_subcommand("simulate", "Simulate noisy sensor measurements of a scene");
  common(simulate);
  mask_input(simulate);
  simulate->add_option("--scene", o.scene_in, "Scene FCVOL")->required();
  simulate->add_option("--snr", o.snr_db, "Measurement SNR in dB, 'inf' for none (noise.snr_db)");
  simulate->add_option("--seed", o.seed, "Noise seed (noise.seed)");
  simulate->add_option("--out", o.out, "Output measurements FCVOL");

  auto* reconstruct = app.add_subcommand("reconstruct", "Joint depth and intensity reconstruction");
  common(reconstruct);
  mask_input(reconstruct);
  reconstruct->add_option("--meas", o.meas_in, "Measurements FCVOL")->required();
  reconstruct->add_option("--truth", o.truth_in, "Ground-truth scene FCVOL for PSNR");
  reconstruct->add_option("--out-dir", o.out_dir, "Output directory");

  auto* baseline = app.add_subcommand("baseline", "Single fixed-depth reconstruction");
  common(baseline);
  mask_input(baseline);
  baseline->add_option("--meas", o.meas_in, "Measurements FCVOL")->required();
  baseline->add_option("--depth-index", o.depth_index, "Depth plane index; -1 sweeps all planes")
      ->default_val(-1);
  baseline->add_option("--ridge", o.ridge, "Ridge weight (default: 1e-6 x mean diagonal of A^T A)");
  baseline->add_option("--truth", o.truth_in, "Ground truth; with a sweep the best-PSNR plane is kept");
  baseline->add_option("--out", o.out, "Output intensity FCMAT");

  auto* evaluate = app.add_subcommand("evaluate", "PSNR and depth accuracy of a reconstruction");
  common(evaluate);
  evaluate->add_option("--truth", o.truth_in, "Ground-truth scene FCVOL")->required();
  evaluate->add_option("--intensity", o.intensity_in, "Reconstructed intensity FCMAT")->required();
  evaluate->add_option("--depth", o.depth_in, "Reconstructed depth map FCMAT");

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over depth-plane and camera counts");
  common(sweep);
  sweep->add_option("--trials", o.trials, "Trials per cell (sweep.trials)");
  sweep->add_option("--seed", o.seed, "Master seed (sweep.seed)");
  sweep->add_option("--out", o.out, "Output CSV");
  sweep->add_option("--summary", o.summary, "Also write the markdown mean table here");
  sweep->add_option("--timing", o.timing, "Write runtimes (1) or zeros for byte-reproducible output (0)")
      ->default_val(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    const ExperimentConfig cfg = load_config(o, name);
    print_resolved(cfg);
    if (name == "gen-mask") return cmd_gen_mask(o, cfg);
    if (name == "gen-scene") return cmd_gen_scene(o, cfg);
    if (name == "build-op") return cmd_build_op(o, cfg);
    if (name == "simulate") return cmd_simulate(o, cfg);
    if (name == "reconstruct") return cmd_reconstruct(o, cfg);
    if (name == "baseline") return cmd_baseline(o, cfg);
    if (name == "evaluate") return cmd_evaluate(o, cfg);
    if (name == "sweep") return cmd_sweep(o, cfg);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
