#pragma once

// Small deterministic problem instances shared by the tests.

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <vector>

#include "flatcam/config.hpp"
#include "flatcam/rng.hpp"
#include "flatcam/system_model.hpp"

namespace fixtures {

/// Desk-scale experiment with `cameras` cameras on the default convex rig.
inline flatcam::ExperimentConfig desk_config(int n, int m, int k, int cameras = 1) {
  flatcam::ExperimentConfig cfg;
  cfg.scene.n_pixels = n;
  cfg.geometry.sensor_pixels = m;
  cfg.depth.count = k;
  cfg.scene.n_cards = std::min(k, 3);
  cfg.sweep.k_values = {k};
  cfg.rig.yaw_deg.clear();
  for (const auto& pose : flatcam::convex_rig(cameras, cfg.sweep.yaw_step_deg))
    cfg.rig.yaw_deg.push_back(pose.yaw * 180.0 / std::numbers::pi);
  return cfg;
}

inline flatcam::SeparableOperator desk_operator(int n, int m, int k, int cameras = 1) {
  const auto e = flatcam::make_experiment(desk_config(n, m, k, cameras));
  return flatcam::build_operator(e.rig(), e.mask, e.depths, e.grid);
}

inline flatcam::Volume random_volume(int n, int k, std::uint64_t seed) {
  flatcam::Xoshiro256 rng(seed);
  flatcam::Volume v(n, n, k);
  for (int kk = 0; kk < k; ++kk)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) v(x, y, kk) = rng.normal();
  return v;
}

inline flatcam::Measurements random_measurements(const flatcam::SeparableOperator& op, std::uint64_t seed) {
  flatcam::Xoshiro256 rng(seed);
  flatcam::Measurements out = op.zero_measurements();
  for (auto& img : out)
    for (Eigen::Index j = 0; j < img.cols(); ++j)
      for (Eigen::Index i = 0; i < img.rows(); ++i) img(i, j) = rng.normal();
  return out;
}

}  // namespace fixtures
