#include "flatcam/system_model.hpp"

#include <string>

#include "flatcam/errors.hpp"

namespace flatcam {

Volume::Volume(int nx, int ny, int n_depths) : nx_(nx), ny_(ny) {
  if (nx < 0 || ny < 0 || n_depths < 0) throw DimensionError("negative volume dimension");
  slices_.assign(static_cast<std::size_t>(n_depths), Matrix::Zero(nx, ny));
}

void Volume::set_zero() {
  for (auto& s : slices_) s.setZero();
}

double Volume::squared_norm() const {
  double total = 0.0;
  for (const auto& s : slices_) total += s.squaredNorm();
  return total;
}

double Volume::dot(const Volume& other) const {
  if (!same_shape(other)) throw DimensionError("volume shape mismatch in dot");
  double total = 0.0;
  for (int k = 0; k < n_depths(); ++k) total += slice(k).cwiseProduct(other.slice(k)).sum();
  return total;
}

bool Volume::same_shape(const Volume& other) const {
  return nx_ == other.nx_ && ny_ == other.ny_ && n_depths() == other.n_depths();
}

bool Volume::nonnegative() const {
  for (const auto& s : slices_)
    if ((s.array() < 0.0).any()) return false;
  return true;
}

Matrix Volume::collapse() const {
  Matrix total = Matrix::Zero(nx_, ny_);
  for (const auto& s : slices_) total += s;
  return total;
}

std::optional<Volume::Structured> Volume::structured() const {
  Structured view{DepthMap::Constant(nx_, ny_, kNoDepth), Matrix::Zero(nx_, ny_)};
  for (int k = 0; k < n_depths(); ++k) {
    const Matrix& s = slice(k);
    for (int y = 0; y < ny_; ++y)
      for (int x = 0; x < nx_; ++x) {
        if (s(x, y) == 0.0) continue;
        if (view.depth_map(x, y) != kNoDepth) return std::nullopt;
        view.depth_map(x, y) = k;
        view.intensity(x, y) = s(x, y);
      }
  }
  return view;
}

Volume Volume::from_structured(const DepthMap& depth_map, const Matrix& intensity, int n_depths) {
  if (depth_map.rows() != intensity.rows() || depth_map.cols() != intensity.cols())
    throw DimensionError("depth map and intensity shapes differ");
  Volume v(static_cast<int>(intensity.rows()), static_cast<int>(intensity.cols()), n_depths);
  for (int y = 0; y < v.ny(); ++y)
    for (int x = 0; x < v.nx(); ++x) {
      const int k = depth_map(x, y);
      if (k == kNoDepth) continue;
      if (k < 0 || k >= n_depths) throw DimensionError("depth index out of range");
      v(x, y, k) = intensity(x, y);
    }
  return v;
}

bool is_valid_scene(const SceneVolume& scene) {
  return scene.nonnegative() && scene.structured().has_value();
}

SeparableOperator::SeparableOperator(std::vector<RigCamera> cameras, DepthPlaneSet depths,
                                     AngularGrid grid, std::vector<std::vector<AxisPair>> phi)
    : cameras_(std::move(cameras)), depths_(std::move(depths)), grid_(grid), phi_(std::move(phi)) {
  if (cameras_.empty()) throw ValidationError("operator needs at least one camera");
  if (phi_.size() != cameras_.size()) throw DimensionError("one matrix list per camera expected");
  for (std::size_t c = 0; c < cameras_.size(); ++c) {
    if (static_cast<int>(phi_[c].size()) != depths_.size())
      throw DimensionError("one matrix pair per depth expected");
    for (const auto& pair : phi_[c]) {
      const int m = cameras_[c].geometry.n_sensor;
      if (pair.x.rows() != m || pair.y.rows() != m || pair.x.cols() != grid_.n_angles ||
          pair.y.cols() != grid_.n_angles)
        throw DimensionError("system matrix must be n_sensor x n_angles");
    }
  }
}

Measurements SeparableOperator::zero_measurements() const {
  Measurements out;
  out.reserve(cameras_.size());
  for (const auto& cam : cameras_) out.push_back(Matrix::Zero(cam.geometry.n_sensor, cam.geometry.n_sensor));
  return out;
}

Matrix build_phi_1d(const CameraGeometry& cam, const MaskSpec& mask, double depth, const AngularGrid& grid) {
  const double d = cam.mask_distance;
  if (!(depth > d)) throw DomainError("depth " + std::to_string(depth) + " mm is not beyond the mask");
  Matrix phi(cam.n_sensor, grid.n_angles);
  for (int j = 0; j < grid.n_angles; ++j) {
    const double theta = grid.angle(j);
    for (int i = 0; i < cam.n_sensor; ++i)
      phi(i, j) = mask_transparency(mask, mask_coordinate(cam.pixel_coordinate(i), theta, depth, d));
  }
  return phi;
}

Matrix build_phi_posed(const CameraGeometry& cam, const CameraPose& pose, const MaskSpec& mask,
                       double depth, const AngularGrid& grid) {
  const double d = cam.mask_distance;
  Matrix phi(cam.n_sensor, grid.n_angles);
  for (int j = 0; j < grid.n_angles; ++j) {
    const EffectiveView view = effective_view(pose, grid.angle(j), depth, d);
    for (int i = 0; i < cam.n_sensor; ++i)
      phi(i, j) = mask_transparency(mask, mask_coordinate(cam.pixel_coordinate(i), view.theta, view.depth, d));
  }
  return phi;
}

double mean_effective_depth(const CameraPose& pose, double depth, const AngularGrid& grid,
                            double mask_distance) {
  double total = 0.0;
  for (int j = 0; j < grid.n_angles; ++j) total += effective_view(pose, grid.angle(j), depth, mask_distance).depth;
  return total / static_cast<double>(grid.n_angles);
}

SeparableOperator build_operator(const std::vector<RigCamera>& cameras, const MaskSpec& mask,
                                 const DepthPlaneSet& depths, const AngularGrid& grid) {
  if (cameras.empty()) throw ValidationError("operator needs at least one camera");
  mask.validate();
  grid.validate();
  std::vector<std::vector<SeparableOperator::AxisPair>> phi(cameras.size());
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    const auto& [geometry, pose] = cameras[c];
    geometry.validate();
    pose.validate();
    phi[c].reserve(depths.depths.size());
    for (double depth : depths.depths) {
      if (pose.is_identity()) {
        Matrix m = build_phi_1d(geometry, mask, depth, grid);
        phi[c].push_back({m, m});
      } else {
        const double mean_depth = mean_effective_depth(pose, depth, grid, geometry.mask_distance);
        phi[c].push_back({build_phi_posed(geometry, pose, mask, depth, grid),
                          build_phi_1d(geometry, mask, mean_depth, grid)});
      }
    }
  }
  return SeparableOperator(cameras, depths, grid, std::move(phi));
}

namespace {

void check_volume(const SeparableOperator& op, const Volume& v) {
  if (v.nx() != op.n_angles() || v.ny() != op.n_angles() || v.n_depths() != op.n_depths())
    throw DimensionError("volume is " + std::to_string(v.nx()) + "x" + std::to_string(v.ny()) + "x" +
                         std::to_string(v.n_depths()) + ", operator expects " +
                         std::to_string(op.n_angles()) + "x" + std::to_string(op.n_angles()) + "x" +
                         std::to_string(op.n_depths()));
}

void check_images(const SeparableOperator& op, const Measurements& images) {
  if (static_cast<int>(images.size()) != op.n_cameras())
    throw DimensionError("expected " + std::to_string(op.n_cameras()) + " sensor images, got " +
                         std::to_string(images.size()));
  for (int c = 0; c < op.n_cameras(); ++c) {
    const auto& img = images[static_cast<std::size_t>(c)];
    if (img.rows() != op.n_sensor(c) || img.cols() != op.n_sensor(c))
      throw DimensionError("sensor image " + std::to_string(c) + " has wrong size");
  }
}

}  // namespace

Measurements forward(const SeparableOperator& op, const Volume& volume) {
  check_volume(op, volume);
  Measurements out = op.zero_measurements();
  Matrix tmp;
  for (int k = 0; k < op.n_depths(); ++k) {
    const Matrix& slice = volume.slice(k);
    if (slice.isZero(0.0)) continue;
    for (int c = 0; c < op.n_cameras(); ++c) {
      const auto& phi = op.phi(c, k);
      tmp.noalias() = phi.x * slice;
      out[static_cast<std::size_t>(c)].noalias() += tmp * phi.y.transpose();
    }
  }
  return out;
}

Volume adjoint(const SeparableOperator& op, const Measurements& residual, const std::vector<bool>* active) {
  check_images(op, residual);
  if (active && static_cast<int>(active->size()) != op.n_depths())
    throw DimensionError("active depth list has wrong length");
  Volume out = op.zero_volume();
  Matrix tmp;
  for (int k = 0; k < op.n_depths(); ++k) {
    if (active && !(*active)[static_cast<std::size_t>(k)]) continue;
    Matrix& slice = out.slice(k);
    for (int c = 0; c < op.n_cameras(); ++c) {
      const auto& phi = op.phi(c, k);
      tmp.noalias() = phi.x.transpose() * residual[static_cast<std::size_t>(c)];
      slice.noalias() += tmp * phi.y;
    }
  }
  return out;
}

SeparableOperator centered(const SeparableOperator& op) {
  std::vector<std::vector<SeparableOperator::AxisPair>> phi(static_cast<std::size_t>(op.n_cameras()));
  for (int c = 0; c < op.n_cameras(); ++c)
    for (int k = 0; k < op.n_depths(); ++k) {
      const auto& pair = op.phi(c, k);
      phi[static_cast<std::size_t>(c)].push_back({pair.x.rowwise() - pair.x.colwise().mean(),
                                                  pair.y.rowwise() - pair.y.colwise().mean()});
    }
  return SeparableOperator(op.cameras(), op.depths(), op.grid(), std::move(phi));
}

Measurements centered(const Measurements& images) {
  Measurements out;
  out.reserve(images.size());
  for (const auto& img : images) {
    Matrix m = img.rowwise() - img.colwise().mean();
    m.colwise() -= m.rowwise().mean();
    out.push_back(std::move(m));
  }
  return out;
}

Matrix densify(const SeparableOperator& op) {
  const long n = op.n_angles();
  const long k_count = op.n_depths();
  long rows = 0;
  for (int c = 0; c < op.n_cameras(); ++c) rows += static_cast<long>(op.n_sensor(c)) * op.n_sensor(c);
  const long cols = n * n * k_count;
  if (static_cast<double>(rows) * static_cast<double>(cols) > 1e7)
    throw DomainError("densify would allocate more than 1e7 entries");

  Matrix a(rows, cols);
  for (long k = 0; k < k_count; ++k)
    for (long y = 0; y < n; ++y)
      for (long x = 0; x < n; ++x) {
        const long col = x + n * y + n * n * k;
        long offset = 0;
        for (int c = 0; c < op.n_cameras(); ++c) {
          const auto& phi = op.phi(c, static_cast<int>(k));
          const long m = op.n_sensor(c);
          for (long j = 0; j < m; ++j)
            for (long i = 0; i < m; ++i) a(offset + i + m * j, col) = phi.x(i, x) * phi.y(j, y);
          offset += m * m;
        }
      }
  return a;
}

Eigen::VectorXd vectorize(const Volume& volume) {
  const long plane = static_cast<long>(volume.nx()) * volume.ny();
  Eigen::VectorXd v(plane * volume.n_depths());
  for (int k = 0; k < volume.n_depths(); ++k)
    v.segment(plane * k, plane) = volume.slice(k).reshaped();
  return v;
}

Volume unvectorize(const Eigen::VectorXd& v, int n, int n_depths) {
  const long plane = static_cast<long>(n) * n;
  if (v.size() != plane * n_depths) throw DimensionError("vector length does not match volume");
  Volume out(n, n, n_depths);
  for (int k = 0; k < n_depths; ++k) out.slice(k) = v.segment(plane * k, plane).reshaped(n, n);
  return out;
}

Eigen::VectorXd vectorize(const Measurements& images) {
  long total = 0;
  for (const auto& img : images) total += img.size();
  Eigen::VectorXd v(total);
  long offset = 0;
  for (const auto& img : images) {
    v.segment(offset, img.size()) = img.reshaped();
    offset += img.size();
  }
  return v;
}

double squared_norm(const Measurements& images) {
  double total = 0.0;
  for (const auto& img : images) total += img.squaredNorm();
  return total;
}

double dot(const Measurements& a, const Measurements& b) {
  if (a.size() != b.size()) throw DimensionError("image list length mismatch");
  double total = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c].rows() != b[c].rows() || a[c].cols() != b[c].cols()) throw DimensionError("image size mismatch");
    total += a[c].cwiseProduct(b[c]).sum();
  }
  return total;
}

Measurements subtract(const Measurements& a, const Measurements& b) {
  if (a.size() != b.size()) throw DimensionError("image list length mismatch");
  Measurements out(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c].rows() != b[c].rows() || a[c].cols() != b[c].cols()) throw DimensionError("image size mismatch");
    out[c] = a[c] - b[c];
  }
  return out;
}

}  // namespace flatcam
