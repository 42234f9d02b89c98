#pragma once

// Greedy depth-selective pursuit: joint per-pixel depth and intensity
// estimation under a one-depth-per-pixel prior, plus the fixed-depth baseline.

#include <optional>
#include <vector>

#include "flatcam/system_model.hpp"

namespace flatcam {

struct PursuitConfig {
  int max_outer_iters = 20;
  double residual_rel_tol = 1e-4;  // stop when relative residual improvement drops below
  int cg_max_iters = 200;
  double cg_tol = 1e-8;            // relative normal-equation residual
  bool nonneg_clamp = true;
  // Solve against the mean-removed operator and measurements. A 0/1 mask puts
  // a large common pedestal on every column; without centering the proxy map
  // ranks depths by that pedestal instead of by the residual structure.
  bool center = true;

  void validate() const;
};

/// Per-pixel union of the current depth map and the proxy candidate. A pixel
/// whose two entries agree has a single supported depth.
struct MergedSupport {
  DepthMap current;
  DepthMap candidate;

  int size(int x, int y) const { return current(x, y) == candidate(x, y) ? 1 : 2; }
  bool contains(int x, int y, int k) const { return current(x, y) == k || candidate(x, y) == k; }
  void validate(int n_depths) const;
};

struct LsqResult {
  Volume volume;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct ReconstructionResult {
  DepthMap depth_map;
  Matrix intensity;
  std::vector<double> residuals;  // residual after each least-squares step (centered if cfg.center)
  int iterations = 0;
  bool converged = false;
  int cg_iterations = 0;          // total over all outer iterations

  Volume volume(int n_depths) const { return Volume::from_structured(depth_map, intensity, n_depths); }
};

/// Every pixel starts on the farthest plane (index 0).
DepthMap init_support(int n, int n_depths);

/// Per-pixel argmax over depth of |P|; ties go to the smaller index.
DepthMap argmax_magnitude(const Volume& proxy);

/// argmax of the proxy map A^T (I - A(current)).
DepthMap proxy_select(const SeparableOperator& op, const Measurements& measurements, const Volume& current);

/// Least squares over volumes supported on `support`, by conjugate gradients on
/// the masked normal equations. `warm_start` (if given) is masked and used as the
/// initial iterate.
LsqResult restricted_lsq(const SeparableOperator& op, const Measurements& measurements,
                         const MergedSupport& support, const PursuitConfig& cfg,
                         const Volume* warm_start = nullptr);

struct PrunedEstimate {
  DepthMap depth_map;
  Matrix intensity;
};

/// Keeps the supported depth with the larger magnitude at each pixel (ties to
/// the smaller index) and optionally clamps the kept value to >= 0.
PrunedEstimate prune_threshold(const Volume& estimate, const MergedSupport& support, bool nonneg);

ReconstructionResult depth_pursuit(const SeparableOperator& op, const Measurements& measurements,
                                   const PursuitConfig& cfg = {});

struct FixedDepthResult {
  Matrix intensity;
  double ridge = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Default ridge weight: 1e-6 times the mean diagonal of A_k^T A_k, which for a
/// separable operator is sum_c |PhiX|_F^2 |PhiY|_F^2 / N^2.
double default_ridge(const SeparableOperator& op, int depth_index);

/// Single-plane reconstruction min |I - A_k L|^2 + ridge |L|^2 at one depth.
FixedDepthResult fixed_depth_reconstruct(const SeparableOperator& op, const Measurements& measurements,
                                         int depth_index, std::optional<double> ridge = std::nullopt,
                                         const PursuitConfig& cfg = {});

}  // namespace flatcam
