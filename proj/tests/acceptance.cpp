// Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "flatcam/config.hpp"
#include "flatcam/errors.hpp"
#include "flatcam/io.hpp"
#include "flatcam/pursuit.hpp"
#include "flatcam/rng.hpp"
#include "flatcam/scene_sim.hpp"
#include "flatcam/sweep.hpp"
#include "oracles.hpp"

using namespace flatcam;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double mean(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = seconds_since(start);
  if (elapsed > budget_s) {
    out.pass = false;
    out.detail += "; over time budget";
  }
  if (!out.pass) ++failures;
  std::printf("criterion %d %s: %s (%s; %.1f s of %.0f s)\n", id, name, out.pass ? "PASS" : "FAIL",
              out.detail.c_str(), elapsed, budget_s);
  std::fflush(stdout);
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

// --- 1 ---------------------------------------------------------------------

Outcome operator_correctness() {
  const SeparableOperator op = fixtures::desk_operator(16, 32, 4, 2);
  double worst_adjoint = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Volume v = fixtures::random_volume(16, 4, seed);
    const Measurements r = fixtures::random_measurements(op, 10000 + seed);
    const double lhs = dot(forward(op, v), r);
    const double rhs = v.dot(adjoint(op, r));
    worst_adjoint = std::max(worst_adjoint, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300}));
  }

  const SeparableOperator small = fixtures::desk_operator(8, 16, 3, 2);
  const Eigen::MatrixXd a = oracle::system_matrix(small);
  double worst_dense = (densify(small) - a).cwiseAbs().maxCoeff();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Volume v = fixtures::random_volume(8, 3, 500 + seed);
    worst_dense = std::max(worst_dense, (oracle::stack(forward(small, v)) - a * oracle::stack(v)).cwiseAbs().maxCoeff());
    const Measurements r = fixtures::random_measurements(small, 600 + seed);
    worst_dense = std::max(worst_dense,
                           (oracle::stack(adjoint(small, r)) - a.transpose() * oracle::stack(r)).cwiseAbs().maxCoeff());
  }
  return {worst_adjoint <= 1e-10 && worst_dense <= 1e-12,
          fmt("adjoint rel err %.2e, dense max abs diff %.2e", worst_adjoint, worst_dense)};
}

// --- 2 ---------------------------------------------------------------------

Outcome exact_recovery() {
  ExperimentConfig cfg = fixtures::desk_config(32, 64, 5);
  const Experiment e = make_experiment(cfg);
  const SeparableOperator op = build_operator(e.rig(), e.mask, e.depths, e.grid);
  double worst_psnr = std::numeric_limits<double>::infinity();
  double worst_acc = 1.0;
  int worst_iters = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SceneSpec spec = cfg.scene_spec();
    spec.seed = seed;
    const SceneVolume scene = generate_cards_scene(spec, e.depths);
    const ReconstructionResult rec = depth_pursuit(op, forward(op, scene), cfg.pursuit());
    const Matrix truth = scene.collapse();
    worst_psnr = std::min(worst_psnr, psnr(truth, rec.intensity));
    worst_acc = std::min(worst_acc, depth_accuracy(scene.structured()->depth_map, rec.depth_map, active_pixels(truth)));
    worst_iters = std::max(worst_iters, rec.iterations);
  }
  return {worst_acc == 1.0 && worst_psnr >= 50.0 && worst_iters <= 20,
          fmt("5 scenes: min depth accuracy %.4f, min PSNR %.1f dB, max %g outer iterations", worst_acc, worst_psnr,
              worst_iters)};
}

// --- 3 ---------------------------------------------------------------------

Outcome pursuit_vs_fixed_depth() {
  ExperimentConfig base = fixtures::desk_config(64, 128, 10);
  std::vector<double> pursuit, baseline;
  for (int t = 0; t < 10; ++t) {
    const ExperimentConfig cfg = trial_config(base, 10, 1, trial_seed(base.sweep.seed, 10, t));
    const Experiment e = make_experiment(cfg);
    const SeparableOperator op = build_operator(e.rig(), e.mask, e.depths, e.grid);
    const SceneVolume scene = generate_cards_scene(cfg.scene_spec(), e.depths);
    const Measurements meas = simulate_measurements(op, scene, cfg.noise_spec());
    const Matrix truth = scene.collapse();
    pursuit.push_back(psnr(truth, depth_pursuit(op, meas, cfg.pursuit()).intensity));
    // Strongest baseline: the best single depth for this scene, chosen with the truth.
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < op.n_depths(); ++k)
      best = std::max(best, psnr(truth, fixed_depth_reconstruct(op, meas, k, std::nullopt, cfg.pursuit()).intensity));
    baseline.push_back(best);
  }
  const double gap = mean(pursuit) - mean(baseline);
  return {gap >= 10.0, fmt("pursuit %.2f dB, best fixed depth %.2f dB, gap %.2f dB", mean(pursuit), mean(baseline), gap)};
}

// --- 4 ---------------------------------------------------------------------

Outcome sweep_trends() {
  ExperimentConfig base = fixtures::desk_config(64, 128, 10);
  base.sweep.k_values = {5, 10};
  base.sweep.cameras = {1, 3};
  base.sweep.trials = 10;
  const auto records = run_sweep(base, sweep_threads_from_env());
  const auto means = cell_means(records);
  auto cell = [&](int k, int c) {
    for (const auto& m : means)
      if (m.depth_count == k && m.cameras == c) return m.mean_psnr_db;
    return std::numeric_limits<double>::quiet_NaN();
  };
  int matched = 0, dominated = 0;
  for (const auto& one : records)
    if (one.cameras == 1)
      for (const auto& three : records)
        if (three.cameras == 3 && three.depth_count == one.depth_count && three.trial == one.trial) {
          ++matched;
          if (three.psnr_db >= one.psnr_db) ++dominated;
        }
  const bool gap_ok = cell(5, 3) - cell(5, 1) >= 3.0 && cell(10, 3) - cell(10, 1) >= 3.0;
  const bool flat_ok = std::abs(cell(5, 1) - cell(10, 1)) <= 5.0;
  std::string detail = fmt("1 cam K=5 %.2f, K=10 %.2f; ", cell(5, 1), cell(10, 1)) +
                       fmt("3 cam K=5 %.2f, K=10 %.2f dB; ", cell(5, 3), cell(10, 3)) +
                       fmt("3 >= 1 camera in %g of %g matched trials", dominated, matched);
  return {gap_ok && flat_ok, detail};
}

// --- 5 ---------------------------------------------------------------------

Outcome full_scale() {
  ExperimentConfig cfg = fixtures::desk_config(128, 256, 10);
  cfg.scene.seed = 1;
  cfg.noise.seed = 2;
  const Experiment e = make_experiment(cfg);
  const SeparableOperator op = build_operator(e.rig(), e.mask, e.depths, e.grid);
  const SceneVolume scene = generate_cards_scene(cfg.scene_spec(), e.depths);
  const Measurements meas = simulate_measurements(op, scene, cfg.noise_spec());
  const ReconstructionResult rec = depth_pursuit(op, meas, cfg.pursuit());
  const Matrix truth = scene.collapse();
  const double value = psnr(truth, rec.intensity);

  // Reference point: least squares on the true depth support.
  const auto view = scene.structured();
  const MergedSupport true_support{view->depth_map.unaryExpr([](int k) { return std::max(k, 0); }),
                                   view->depth_map.unaryExpr([](int k) { return std::max(k, 0); })};
  const LsqResult ideal = restricted_lsq(centered(op), centered(meas), true_support, cfg.pursuit());
  const double ideal_psnr = psnr(truth, prune_threshold(ideal.volume, true_support, true).intensity);

  const bool ok = std::isfinite(value) && value >= 25.0 && rec.iterations <= cfg.solver.max_outer_iters;
  return {ok, fmt("PSNR %.2f dB after %g outer iterations; true-support least squares reaches %.2f dB", value,
                  rec.iterations, ideal_psnr)};
}

// --- 6 ---------------------------------------------------------------------

Outcome depth_sampling() {
  const DepthPlaneSet set = sample_depth_planes(1.0, 100.0, 3000.0, 10);
  const auto expected = oracle::harmonic_depths(100.0L, 3000.0L, 10);
  bool ok = set.size() == 10 && set.depths.front() == 3000.0 && set.depths.back() == 100.0;
  double worst_spacing = 0.0, worst_depth = 0.0;
  const double step = set.slopes[1] - set.slopes[0];
  for (int k = 1; k < set.size(); ++k)
    worst_spacing = std::max(worst_spacing, std::abs(set.slopes[k] - set.slopes[k - 1] - step));
  for (int k = 0; k < set.size(); ++k)
    worst_depth = std::max(worst_depth, std::abs(set.depths[k] - static_cast<double>(expected[k])) / set.depths[k]);
  for (int k = 1; k + 1 < set.size(); ++k)
    ok = ok && set.depths[k] - set.depths[k + 1] < set.depths[k - 1] - set.depths[k];
  ok = ok && worst_spacing <= 1e-12 && worst_depth <= 1e-12;
  return {ok, fmt("D_1 = %.17g, D_K = %.17g, slope spacing error %.2e", set.depths.front(), set.depths.back(),
                  worst_spacing)};
}

// --- 7 ---------------------------------------------------------------------

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::equal(a.data(), a.data() + a.size(), b.data(),
                    [](double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; });
}

Outcome determinism_and_formats() {
  ExperimentConfig base = fixtures::desk_config(16, 32, 3);
  base.sweep.k_values = {3, 4};
  base.sweep.cameras = {1, 3};
  base.sweep.trials = 3;
  const std::string first = sweep_csv(run_sweep(base, 1), false);
  const std::string second = sweep_csv(run_sweep(base, 2), false);
  const bool csv_same = first == second;

  Xoshiro256 rng(77);
  bool round_trips = true;
  for (int i = 0; i < 20; ++i) {
    const int rows = 1 + static_cast<int>(rng.below(30));
    const int cols = 1 + static_cast<int>(rng.below(30));
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < m.size(); ++j) {
      const std::uint64_t bits = rng.next();
      double value;
      std::memcpy(&value, &bits, sizeof value);  // arbitrary bit patterns, NaNs included
      m.data()[j] = value;
    }
    round_trips = round_trips && bit_equal(decode_matrix(encode_matrix(m)), m);

    const Volume v = fixtures::random_volume(1 + static_cast<int>(rng.below(6)), 1 + static_cast<int>(rng.below(4)), rng.next());
    const Volume vb = decode_volume(encode_volume(v));
    for (int k = 0; k < v.n_depths(); ++k) round_trips = round_trips && vb.same_shape(v) && bit_equal(vb.slice(k), v.slice(k));

    const MaskSpec mask = generate_mask(1 + static_cast<int>(rng.below(300)), 1e-3 * (1.0 + rng.uniform()), rng.next(),
                                        rng.below(2) == 1);
    const std::string text = encode_mask(mask);
    const MaskSpec mb = decode_mask(text);
    round_trips = round_trips && mb.bits == mask.bits && mb.pitch == mask.pitch && mb.offset == mask.offset &&
                  mb.seed == mask.seed && mb.symmetric == mask.symmetric && encode_mask(mb) == text;

    const Measurements images{Matrix::Random(5, 5), Matrix::Random(5, 5)};
    const Measurements ib = decode_measurements(encode_measurements(images));
    round_trips = round_trips && ib.size() == 2 && bit_equal(ib[0], images[0]) && bit_equal(ib[1], images[1]);

    DepthMap map = DepthMap::Random(4, 7).unaryExpr([](int x) { return std::abs(x) % 12 - 1; });
    round_trips = round_trips && decode_depth_map(encode_depth_map(map)) == map;
  }

  // Header fuzz: every corrupted header must either still decode or raise FormatError.
  const std::string mat = encode_matrix(Matrix::Random(3, 4));
  const std::string vol = encode_volume(fixtures::random_volume(3, 2, 1));
  const std::string msk = encode_mask(generate_mask(11, 0.01, 2, false));
  int clean = 0, unclean = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string& src = i % 3 == 0 ? mat : i % 3 == 1 ? vol : msk;
    std::string s = src;
    const std::size_t header_end = std::min<std::size_t>(s.size(), 32);
    switch (rng.below(6)) {
      case 0:
        s[rng.below(header_end)] = static_cast<char>(rng.below(256));
        break;
      case 1:
        s.resize(rng.below(s.size()));
        break;
      case 2:
        s.insert(rng.below(header_end), 1, static_cast<char>(rng.below(256)));
        break;
      case 3:
        s.erase(rng.below(header_end), 1);
        break;
      case 4:
        s = s.substr(0, 8) + std::to_string(rng.next()) + " " + std::to_string(rng.next()) + " 1\n";
        break;
      default:
        s = s.substr(0, 8) + "-" + std::to_string(rng.below(100)) + " 3\n" + s.substr(std::min<std::size_t>(s.size(), 14));
        break;
    }
    try {
      if (i % 3 == 0)
        decode_matrix(s);
      else if (i % 3 == 1)
        decode_volume(s);
      else
        decode_mask(s);
      ++clean;  // mutation left a valid file
    } catch (const FormatError&) {
      ++clean;
    } catch (...) {
      ++unclean;
    }
  }
  return {csv_same && round_trips && unclean == 0 && clean == 1000,
          std::string("sweep CSV ") + (csv_same ? "identical" : "DIFFERS") + ", round trips " +
              (round_trips ? "bit exact" : "MISMATCH") + fmt(", fuzz: %g clean, %g unclean", clean, unclean)};
}

}  // namespace

int main() {
  criterion(1, "operator correctness", 10, operator_correctness);
  criterion(2, "exact recovery", 60, exact_recovery);
  criterion(3, "pursuit vs fixed depth", 600, pursuit_vs_fixed_depth);
  criterion(4, "camera and depth trends", 1800, sweep_trends);
  criterion(5, "full-scale run", 1800, full_scale);
  criterion(6, "depth sampling", 10, depth_sampling);
  criterion(7, "determinism and formats", 120, determinism_and_formats);
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
