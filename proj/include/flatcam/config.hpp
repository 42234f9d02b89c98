#pragma once

// Experiment configuration.
//
// Text format: one `section.key = value` per line; `#` starts a comment; blank
// lines are ignored. Lists are comma separated. Booleans are 0/1. Angles are in
// degrees here and radians everywhere else. Unknown keys are errors.
//
// Some geometry values are derived from others unless set explicitly (see
// resolve()); they are held as optionals so that serialising a parsed config
// reproduces what the user wrote.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flatcam/optics.hpp"
#include "flatcam/pursuit.hpp"
#include "flatcam/scene_sim.hpp"

namespace flatcam {

struct ExperimentConfig {
  struct Geometry {
    double mask_distance = 1.0;  // d, mm
    int sensor_pixels = 256;     // M
    std::optional<double> sensor_pitch;
    double theta_min_deg = -20.0;
    double theta_max_deg = 20.0;
    bool operator==(const Geometry&) const = default;
  } geometry;

  struct Mask {
    std::optional<int> features;
    std::optional<double> pitch;
    std::uint64_t seed = 1;
    bool symmetric = false;
    bool operator==(const Mask&) const = default;
  } mask;

  struct Depth {
    double min_mm = 100.0;
    double max_mm = 3000.0;
    int count = 10;  // K
    bool operator==(const Depth&) const = default;
  } depth;

  struct Scene {
    int n_pixels = 128;  // N
    int n_cards = 3;
    double card_min = 0.2;
    double card_max = 0.4;
    double intensity_min = 0.25;
    double intensity_max = 1.0;
    std::uint64_t seed = 1;
    bool operator==(const Scene&) const = default;
  } scene;

  struct Noise {
    double snr_db = 40.0;
    std::uint64_t seed = 2;
    bool operator==(const Noise&) const = default;
  } noise;

  struct Solver {
    int max_outer_iters = 20;
    double residual_rel_tol = 1e-4;
    int cg_max_iters = 200;
    double cg_tol = 1e-8;
    bool nonneg_clamp = true;
    bool center = true;  // solve on mean-removed images
    bool operator==(const Solver&) const = default;
  } solver;

  struct Rig {
    std::vector<double> yaw_deg{0.0};
    std::vector<double> x_mm;  // empty = all zero
    std::vector<double> z_mm;
    bool operator==(const Rig&) const = default;
  } rig;

  struct Sweep {
    std::vector<int> k_values{5, 10, 15, 20, 25};
    std::vector<int> cameras{1, 3};
    int trials = 10;
    std::uint64_t seed = 7;
    double yaw_step_deg = 20.0;  // spacing of the convex rig
    bool operator==(const Sweep&) const = default;
  } sweep;

  std::string output_dir = ".";

  bool operator==(const ExperimentConfig&) const = default;

  PursuitConfig pursuit() const;
  SceneSpec scene_spec() const;
  NoiseSpec noise_spec() const;
  std::vector<CameraPose> poses() const;

  /// Checks every module-level precondition. Throws ValidationError naming the key.
  void validate() const;
};

/// Sets one `section.key` from its text value. Throws ValidationError on an
/// unknown key or unparsable value.
void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Parses the line format. Syntax errors carry "line L, column C".
ExperimentConfig parse_config(std::string_view text);

/// Writes every field that has a value; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

/// Fully resolved physical setup.
struct Experiment {
  CameraGeometry camera;
  AngularGrid grid;
  MaskSpec mask;
  DepthPlaneSet depths;
  std::vector<CameraPose> poses;

  std::vector<RigCamera> rig() const;
};

/// Default sensor pitch for M pixels: sensor width = kDefaultSensorWidthPerD * d.
inline constexpr double kDefaultSensorWidthPerD = 6.0;
/// Default mask pitch is the mean per-angle shadow shift divided by this.
inline constexpr double kMaskFeaturesPerAngle = 8.0;

double default_mask_pitch(const ExperimentConfig& cfg);
double default_sensor_pitch(const ExperimentConfig& cfg);
int default_mask_features(const ExperimentConfig& cfg, double mask_pitch, double sensor_pitch);

/// Fills derived geometry values (sensor pitch, mask pitch, mask features).
ExperimentConfig resolve_defaults(const ExperimentConfig& cfg);

Experiment make_experiment(const ExperimentConfig& cfg);

/// Yaws of an n-camera convex rig: 0, +step, -step, +2 step, ...
std::vector<CameraPose> convex_rig(int n_cameras, double yaw_step_deg);

}  // namespace flatcam
