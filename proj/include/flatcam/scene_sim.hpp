#pragma once

// Synthetic multi-plane scenes, noisy measurement simulation, and evaluation
// metrics for reconstructions.

#include <cstdint>
#include <limits>
#include <vector>

#include "flatcam/pursuit.hpp"
#include "flatcam/system_model.hpp"

namespace flatcam {

struct SceneSpec {
  int n_pixels = 128;
  int n_cards = 3;
  double card_min = 0.2;  // card side as a fraction of n_pixels
  double card_max = 0.4;
  double intensity_min = 0.25;
  double intensity_max = 1.0;
  std::uint64_t seed = 1;

  void validate(int n_depths) const;
};

struct NoiseSpec {
  double snr_db = 40.0;  // +inf disables noise
  std::uint64_t seed = 2;

  bool enabled() const { return std::isfinite(snr_db); }
};

/// Axis-aligned constant-intensity cards on distinct random depth planes. Later
/// cards overwrite earlier ones where they overlap.
SceneVolume generate_cards_scene(const SceneSpec& spec, const DepthPlaneSet& depths);

/// forward(scene) plus white Gaussian noise with sigma_c = rms(clean_c) * 10^(-snr/20).
Measurements simulate_measurements(const SeparableOperator& op, const SceneVolume& scene, const NoiseSpec& noise);

/// 10 log10(peak^2 / MSE); +inf when the images are identical.
double psnr(const Matrix& reference, const Matrix& estimate, double peak);
/// Same, with peak = max of the reference.
double psnr(const Matrix& reference, const Matrix& estimate);

/// Pixels whose intensity exceeds `fraction` of the image maximum.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> active_pixels(const Matrix& intensity, double fraction = 0.01);

/// Fraction of active pixels whose depth index matches; 1 when nothing is active.
double depth_accuracy(const DepthMap& truth, const DepthMap& estimate,
                      const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& active);

}  // namespace flatcam
