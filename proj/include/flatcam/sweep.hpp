#pragma once

// Monte Carlo sweep over depth-plane counts and camera counts. Every trial is
// replayable from its recorded seed.

#include <cstdint>
#include <string>
#include <vector>

#include "flatcam/config.hpp"

namespace flatcam {

struct TrialRecord {
  int depth_count = 0;
  int cameras = 0;
  int trial = 0;
  double psnr_db = 0.0;  // +inf for an exact match, NaN if the trial failed
  double depth_accuracy = 0.0;
  double runtime_s = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  std::string error;  // empty on success
};

/// Seed of trial `trial` at K planes. Independent of the camera count so that
/// one- and multi-camera trials see the same scene and noise.
std::uint64_t trial_seed(std::uint64_t master, int depth_count, int trial);

/// Config of a single trial: K, convex rig of `cameras`, scene/noise seeds
/// derived from `seed`.
ExperimentConfig trial_config(const ExperimentConfig& base, int depth_count, int cameras, std::uint64_t seed);

/// Builds, simulates and reconstructs one trial. Failures are returned in
/// TrialRecord::error.
TrialRecord run_trial(const ExperimentConfig& base, int depth_count, int cameras, int trial);

/// All (K, cameras, trial) combinations of base.sweep, ordered by that triple.
/// `threads` = 0 uses the hardware concurrency.
std::vector<TrialRecord> run_sweep(const ExperimentConfig& base, int threads = 1);

/// Reads FLATCAM_THREADS (0 or unset = auto).
int sweep_threads_from_env();

/// CSV with header `K,cameras,trial,psnr_db,depth_accuracy,runtime_s,seed`.
/// With include_timing = false the runtime column is written as 0 so that the
/// file is byte-reproducible.
std::string sweep_csv(const std::vector<TrialRecord>& records, bool include_timing = true);

struct CellMean {
  int depth_count = 0;
  int cameras = 0;
  double mean_psnr_db = 0.0;
  double mean_depth_accuracy = 0.0;
  int trials = 0;
  int failures = 0;
};

/// Per (K, cameras) means over successful trials with finite PSNR.
std::vector<CellMean> cell_means(const std::vector<TrialRecord>& records);

/// Markdown table: one row per camera count, one column per K.
std::string sweep_summary_markdown(const std::vector<TrialRecord>& records);

}  // namespace flatcam
