#include "flatcam/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numbers>
#include <set>
#include <thread>

#include "flatcam/rng.hpp"

namespace flatcam {

std::uint64_t trial_seed(std::uint64_t master, int depth_count, int trial) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(depth_count)), static_cast<std::uint64_t>(trial));
}

ExperimentConfig trial_config(const ExperimentConfig& base, int depth_count, int cameras, std::uint64_t seed) {
  ExperimentConfig cfg = base;
  cfg.depth.count = depth_count;
  cfg.scene.seed = derive_seed(seed, 1);
  cfg.noise.seed = derive_seed(seed, 2);
  cfg.rig = {};
  cfg.rig.yaw_deg.clear();
  for (const auto& pose : convex_rig(cameras, base.sweep.yaw_step_deg))
    cfg.rig.yaw_deg.push_back(pose.yaw * 180.0 / std::numbers::pi);
  return cfg;
}

TrialRecord run_trial(const ExperimentConfig& base, int depth_count, int cameras, int trial) {
  TrialRecord rec;
  rec.depth_count = depth_count;
  rec.cameras = cameras;
  rec.trial = trial;
  rec.seed = trial_seed(base.sweep.seed, depth_count, trial);

  const auto start = std::chrono::steady_clock::now();
  try {
    ExperimentConfig cfg = trial_config(base, depth_count, cameras, rec.seed);
    Experiment e = make_experiment(cfg);
    e.poses = convex_rig(cameras, base.sweep.yaw_step_deg);
    const SeparableOperator op = build_operator(e.rig(), e.mask, e.depths, e.grid);
    const SceneVolume scene = generate_cards_scene(cfg.scene_spec(), e.depths);
    const Measurements meas = simulate_measurements(op, scene, cfg.noise_spec());
    const ReconstructionResult result = depth_pursuit(op, meas, cfg.pursuit());

    const Matrix truth = scene.collapse();
    rec.psnr_db = psnr(truth, result.intensity);
    const auto view = scene.structured();
    rec.depth_accuracy = depth_accuracy(view->depth_map, result.depth_map, active_pixels(truth));
    rec.iterations = result.iterations;
  } catch (const std::exception& ex) {
    rec.psnr_db = std::nan("");
    rec.depth_accuracy = std::nan("");
    rec.error = ex.what();
  }
  rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<TrialRecord> run_sweep(const ExperimentConfig& base, int threads) {
  base.validate();
  struct Job {
    int k, cameras, trial;
  };
  std::vector<int> ks = base.sweep.k_values;
  std::vector<int> cams = base.sweep.cameras;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::sort(cams.begin(), cams.end());
  cams.erase(std::unique(cams.begin(), cams.end()), cams.end());

  std::vector<Job> jobs;
  for (int k : ks)
    for (int c : cams)
      for (int t = 0; t < base.sweep.trials; ++t) jobs.push_back({k, c, t});

  std::vector<TrialRecord> records(jobs.size());
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min<int>(threads, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++)
      records[i] = run_trial(base, jobs[i].k, jobs[i].cameras, jobs[i].trial);
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

int sweep_threads_from_env() {
  const char* value = std::getenv("FLATCAM_THREADS");
  if (!value) return 0;
  const int n = std::atoi(value);
  return n < 0 ? 0 : n;
}

namespace {
std::string format_double(double v, const char* fmt) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}
}  // namespace

std::string sweep_csv(const std::vector<TrialRecord>& records, bool include_timing) {
  std::string out = "K,cameras,trial,psnr_db,depth_accuracy,runtime_s,seed\n";
  for (const auto& r : records) {
    out += std::to_string(r.depth_count) + ',' + std::to_string(r.cameras) + ',' + std::to_string(r.trial) + ',' +
           format_double(r.psnr_db, "%.17g") + ',' + format_double(r.depth_accuracy, "%.17g") + ',' +
           format_double(include_timing ? r.runtime_s : 0.0, "%.3f") + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<CellMean> cell_means(const std::vector<TrialRecord>& records) {
  std::map<std::pair<int, int>, CellMean> cells;
  std::map<std::pair<int, int>, int> finite;
  for (const auto& r : records) {
    const std::pair key{r.depth_count, r.cameras};
    CellMean& cell = cells[key];
    cell.depth_count = r.depth_count;
    cell.cameras = r.cameras;
    if (!r.error.empty()) {
      ++cell.failures;
      continue;
    }
    ++cell.trials;
    // Exact reconstructions (+inf) are counted but cannot enter a mean.
    if (!std::isfinite(r.psnr_db)) continue;
    cell.mean_psnr_db += r.psnr_db;
    cell.mean_depth_accuracy += r.depth_accuracy;
    ++finite[key];
  }
  std::vector<CellMean> out;
  for (auto& [key, cell] : cells) {
    if (const int n = finite[key]; n > 0) {
      cell.mean_psnr_db /= n;
      cell.mean_depth_accuracy /= n;
    } else {
      cell.mean_psnr_db = std::nan("");
      cell.mean_depth_accuracy = std::nan("");
    }
    out.push_back(cell);
  }
  return out;
}

std::string sweep_summary_markdown(const std::vector<TrialRecord>& records) {
  const auto means = cell_means(records);
  std::set<int> ks, cams;
  for (const auto& m : means) {
    ks.insert(m.depth_count);
    cams.insert(m.cameras);
  }
  std::string out = "| cameras |";
  for (int k : ks) out += " K=" + std::to_string(k) + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < ks.size(); ++i) out += "---|";
  out += '\n';
  for (int c : cams) {
    out += "| " + std::to_string(c) + " |";
    for (int k : ks) {
      auto it = std::find_if(means.begin(), means.end(),
                             [&](const CellMean& m) { return m.depth_count == k && m.cameras == c; });
      out += " " + (it == means.end() ? std::string("-") : format_double(it->mean_psnr_db, "%.2f")) + " |";
    }
    out += '\n';
  }
  return out;
}

}  // namespace flatcam
