#include "flatcam/pursuit.hpp"

#include <cmath>
#include <string>

#include "flatcam/errors.hpp"

namespace flatcam {

void PursuitConfig::validate() const {
  if (max_outer_iters < 1) throw ValidationError("solver.max_outer_iters must be >= 1");
  if (!(residual_rel_tol > 0.0)) throw ValidationError("solver.residual_rel_tol must be > 0");
  if (cg_max_iters < 1) throw ValidationError("solver.cg_max_iters must be >= 1");
  if (!(cg_tol > 0.0)) throw ValidationError("solver.cg_tol must be > 0");
}

void MergedSupport::validate(int n_depths) const {
  if (current.rows() != candidate.rows() || current.cols() != candidate.cols())
    throw DimensionError("support maps differ in shape");
  if ((current.array() < 0).any() || (current.array() >= n_depths).any() || (candidate.array() < 0).any() ||
      (candidate.array() >= n_depths).any())
    throw DimensionError("support depth index out of range");
}

DepthMap init_support(int n, int n_depths) {
  if (n_depths < 1) throw ValidationError("init_support needs K >= 1");
  return DepthMap::Zero(n, n);
}

DepthMap argmax_magnitude(const Volume& proxy) {
  DepthMap best = DepthMap::Zero(proxy.nx(), proxy.ny());
  Matrix best_value = proxy.n_depths() > 0 ? Matrix(proxy.slice(0).cwiseAbs()) : Matrix::Zero(proxy.nx(), proxy.ny());
  for (int k = 1; k < proxy.n_depths(); ++k) {
    const Matrix& s = proxy.slice(k);
    for (int y = 0; y < proxy.ny(); ++y)
      for (int x = 0; x < proxy.nx(); ++x) {
        const double v = std::abs(s(x, y));
        if (v > best_value(x, y)) {
          best_value(x, y) = v;
          best(x, y) = k;
        }
      }
  }
  return best;
}

DepthMap proxy_select(const SeparableOperator& op, const Measurements& measurements, const Volume& current) {
  const Measurements residual = subtract(measurements, forward(op, current));
  return argmax_magnitude(adjoint(op, residual));
}

namespace {

struct SupportMask {
  std::vector<Matrix> weights;  // 0/1 per depth slice
  std::vector<bool> active;     // depth has any supported pixel

  void apply(Volume& v) const {
    for (int k = 0; k < v.n_depths(); ++k) {
      if (active[static_cast<std::size_t>(k)])
        v.slice(k).array() *= weights[static_cast<std::size_t>(k)].array();
      else
        v.slice(k).setZero();
    }
  }
};

SupportMask make_mask(const MergedSupport& support, int n_depths) {
  const auto nx = support.current.rows();
  const auto ny = support.current.cols();
  SupportMask mask{std::vector<Matrix>(static_cast<std::size_t>(n_depths), Matrix::Zero(nx, ny)),
                   std::vector<bool>(static_cast<std::size_t>(n_depths), false)};
  for (Eigen::Index y = 0; y < ny; ++y)
    for (Eigen::Index x = 0; x < nx; ++x)
      for (int k : {support.current(x, y), support.candidate(x, y)}) {
        mask.weights[static_cast<std::size_t>(k)](x, y) = 1.0;
        mask.active[static_cast<std::size_t>(k)] = true;
      }
  return mask;
}

void axpy(double alpha, const Volume& x, Volume& y) {
  for (int k = 0; k < y.n_depths(); ++k) y.slice(k) += alpha * x.slice(k);
}

void axpy(double alpha, const Measurements& x, Measurements& y) {
  for (std::size_t c = 0; c < y.size(); ++c) y[c] += alpha * x[c];
}

// CGLS for min |b - A P x|^2 + ridge |x|^2 with P the support projection.
LsqResult masked_cgls(const SeparableOperator& op, const Measurements& b, const SupportMask& mask,
                      double ridge, int max_iters, double tol, const Volume* warm_start) {
  LsqResult result{op.zero_volume(), 0.0, 0, false};
  Volume& x = result.volume;

  Volume reference = adjoint(op, b, &mask.active);
  mask.apply(reference);
  const double reference_norm = std::sqrt(reference.squared_norm());
  if (reference_norm == 0.0) {
    result.converged = true;
    result.residual_norm = std::sqrt(squared_norm(b));
    return result;
  }

  if (warm_start) {
    x = *warm_start;
    mask.apply(x);
  }
  Measurements r = subtract(b, forward(op, x));
  Volume s = adjoint(op, r, &mask.active);
  mask.apply(s);
  if (ridge != 0.0) axpy(-ridge, x, s);
  Volume p = s;
  double gamma = s.squared_norm();

  for (int it = 0; it < max_iters; ++it) {
    if (std::sqrt(gamma) <= tol * reference_norm) {
      result.converged = true;
      break;
    }
    const Measurements q = forward(op, p);
    const double delta = squared_norm(q) + ridge * p.squared_norm();
    if (!(delta > 0.0)) break;
    const double alpha = gamma / delta;
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    s = adjoint(op, r, &mask.active);
    mask.apply(s);
    if (ridge != 0.0) axpy(-ridge, x, s);
    const double gamma_next = s.squared_norm();
    const double beta = gamma_next / gamma;
    gamma = gamma_next;
    for (int k = 0; k < p.n_depths(); ++k) p.slice(k) = s.slice(k) + beta * p.slice(k);
    result.iterations = it + 1;
  }
  if (!result.converged && std::sqrt(gamma) <= tol * reference_norm) result.converged = true;

  result.residual_norm = std::sqrt(squared_norm(subtract(b, forward(op, x))));
  return result;
}

}  // namespace

LsqResult restricted_lsq(const SeparableOperator& op, const Measurements& measurements,
                         const MergedSupport& support, const PursuitConfig& cfg, const Volume* warm_start) {
  support.validate(op.n_depths());
  if (support.current.rows() != op.n_angles() || support.current.cols() != op.n_angles())
    throw DimensionError("support map does not match the angular grid");
  if (warm_start && !warm_start->same_shape(op.zero_volume()))
    throw DimensionError("warm start has wrong shape");
  return masked_cgls(op, measurements, make_mask(support, op.n_depths()), 0.0, cfg.cg_max_iters, cfg.cg_tol,
                     warm_start);
}

PrunedEstimate prune_threshold(const Volume& estimate, const MergedSupport& support, bool nonneg) {
  support.validate(estimate.n_depths());
  PrunedEstimate out{DepthMap(estimate.nx(), estimate.ny()), Matrix(estimate.nx(), estimate.ny())};
  for (int y = 0; y < estimate.ny(); ++y)
    for (int x = 0; x < estimate.nx(); ++x) {
      int a = support.current(x, y);
      int b = support.candidate(x, y);
      if (b < a) std::swap(a, b);
      const int chosen = std::abs(estimate(x, y, b)) > std::abs(estimate(x, y, a)) ? b : a;
      double value = estimate(x, y, chosen);
      if (nonneg && value < 0.0) value = 0.0;
      out.depth_map(x, y) = chosen;
      out.intensity(x, y) = value;
    }
  return out;
}

ReconstructionResult depth_pursuit(const SeparableOperator& raw_op, const Measurements& raw_measurements,
                                   const PursuitConfig& cfg) {
  cfg.validate();
  const SeparableOperator op = cfg.center ? centered(raw_op) : raw_op;
  const Measurements measurements = cfg.center ? centered(raw_measurements) : raw_measurements;
  const int n = op.n_angles();
  const int n_depths = op.n_depths();

  ReconstructionResult result;
  result.depth_map = init_support(n, n_depths);
  result.intensity = Matrix::Zero(n, n);
  Volume current = op.zero_volume();

  const double data_norm = std::sqrt(squared_norm(measurements));
  double previous = data_norm;
  for (int it = 0; it < cfg.max_outer_iters; ++it) {
    MergedSupport support{result.depth_map, proxy_select(op, measurements, current)};
    LsqResult lsq = restricted_lsq(op, measurements, support, cfg, &current);
    result.cg_iterations += lsq.iterations;
    result.residuals.push_back(lsq.residual_norm);

    PrunedEstimate pruned = prune_threshold(lsq.volume, support, cfg.nonneg_clamp);
    result.depth_map = std::move(pruned.depth_map);
    result.intensity = std::move(pruned.intensity);
    current = result.volume(n_depths);
    result.iterations = it + 1;

    const double residual = lsq.residual_norm;
    if (previous == 0.0 || residual <= cfg.cg_tol * data_norm ||
        (previous - residual) / previous < cfg.residual_rel_tol) {
      result.converged = true;
      break;
    }
    previous = residual;
  }
  return result;
}

double default_ridge(const SeparableOperator& op, int depth_index) {
  double total = 0.0;
  for (int c = 0; c < op.n_cameras(); ++c) {
    const auto& phi = op.phi(c, depth_index);
    total += phi.x.squaredNorm() * phi.y.squaredNorm();
  }
  const double n = op.n_angles();
  return 1e-6 * total / (n * n);
}

FixedDepthResult fixed_depth_reconstruct(const SeparableOperator& raw_op, const Measurements& raw_measurements,
                                         int depth_index, std::optional<double> ridge, const PursuitConfig& cfg) {
  const SeparableOperator op = cfg.center ? centered(raw_op) : raw_op;
  const Measurements measurements = cfg.center ? centered(raw_measurements) : raw_measurements;
  if (depth_index < 0 || depth_index >= op.n_depths())
    throw ValidationError("depth index " + std::to_string(depth_index) + " out of range");
  const double weight = ridge.value_or(default_ridge(op, depth_index));
  if (!(weight >= 0.0)) throw ValidationError("ridge must be >= 0");

  const int n = op.n_angles();
  MergedSupport support{DepthMap::Constant(n, n, depth_index), DepthMap::Constant(n, n, depth_index)};
  LsqResult lsq = masked_cgls(op, measurements, make_mask(support, op.n_depths()), weight, cfg.cg_max_iters,
                              cfg.cg_tol, nullptr);
  return {lsq.volume.slice(depth_index), weight, lsq.iterations, lsq.converged};
}

}  // namespace flatcam
