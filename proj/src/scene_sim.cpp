#include "flatcam/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "flatcam/errors.hpp"
#include "flatcam/rng.hpp"

namespace flatcam {

void SceneSpec::validate(int n_depths) const {
  if (n_pixels < 2) throw ValidationError("scene.n_pixels must be >= 2");
  if (n_cards < 0) throw ValidationError("scene.n_cards must be >= 0");
  if (n_cards > n_depths)
    throw ValidationError("scene.n_cards (" + std::to_string(n_cards) + ") exceeds the number of depth planes");
  if (!(0.0 < card_min && card_min <= card_max && card_max <= 1.0))
    throw ValidationError("card size fractions must satisfy 0 < min <= max <= 1");
  if (!(0.0 < intensity_min && intensity_min <= intensity_max && std::isfinite(intensity_max)))
    throw ValidationError("card intensities must satisfy 0 < min <= max");
}

SceneVolume generate_cards_scene(const SceneSpec& spec, const DepthPlaneSet& depths) {
  const int n_depths = depths.size();
  spec.validate(n_depths);
  const int n = spec.n_pixels;
  SceneVolume scene(n, n, n_depths);
  Xoshiro256 rng(spec.seed);

  // Distinct depth indices via a partial Fisher-Yates shuffle.
  std::vector<int> order(static_cast<std::size_t>(n_depths));
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < spec.n_cards; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(n_depths - i));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
  }

  auto side = [&] {
    const double frac = spec.card_min + (spec.card_max - spec.card_min) * rng.uniform();
    return std::clamp(static_cast<int>(std::lround(frac * n)), 1, n);
  };
  for (int card = 0; card < spec.n_cards; ++card) {
    const int k = order[static_cast<std::size_t>(card)];
    const int w = side();
    const int h = side();
    const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - w + 1)));
    const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - h + 1)));
    const double value = spec.intensity_min + (spec.intensity_max - spec.intensity_min) * rng.uniform();
    for (int kk = 0; kk < n_depths; ++kk) scene.slice(kk).block(x0, y0, w, h).setZero();
    scene.slice(k).block(x0, y0, w, h).setConstant(value);
  }
  return scene;
}

Measurements simulate_measurements(const SeparableOperator& op, const SceneVolume& scene, const NoiseSpec& noise) {
  Measurements images = forward(op, scene);
  if (!noise.enabled()) return images;
  Xoshiro256 rng(noise.seed);
  const double scale = std::pow(10.0, -noise.snr_db / 20.0);
  for (auto& img : images) {
    const double rms = std::sqrt(img.squaredNorm() / static_cast<double>(img.size()));
    const double sigma = rms * scale;
    // Column-major traversal fixes the draw order.
    for (Eigen::Index j = 0; j < img.cols(); ++j)
      for (Eigen::Index i = 0; i < img.rows(); ++i) {
        const double z = rng.normal();
        img(i, j) += sigma * z;
      }
  }
  return images;
}

double psnr(const Matrix& reference, const Matrix& estimate, double peak) {
  if (reference.rows() != estimate.rows() || reference.cols() != estimate.cols())
    throw DimensionError("psnr: image sizes differ");
  if (!(peak > 0.0)) throw ValidationError("psnr: peak must be > 0");
  const double mse = (reference - estimate).squaredNorm() / static_cast<double>(reference.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double psnr(const Matrix& reference, const Matrix& estimate) {
  return psnr(reference, estimate, reference.size() ? reference.maxCoeff() : 0.0);
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> active_pixels(const Matrix& intensity, double fraction) {
  const double peak = intensity.size() ? intensity.maxCoeff() : 0.0;
  if (!(peak > 0.0)) return Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(intensity.rows(), intensity.cols(), false);
  return intensity.array() > fraction * peak;
}

double depth_accuracy(const DepthMap& truth, const DepthMap& estimate,
                      const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& active) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols() || truth.rows() != active.rows() ||
      truth.cols() != active.cols())
    throw DimensionError("depth_accuracy: map sizes differ");
  const auto count = active.count();
  if (count == 0) return 1.0;
  const auto hits = (active && (truth.array() == estimate.array())).count();
  return static_cast<double>(hits) / static_cast<double>(count);
}

}  // namespace flatcam
