#pragma once

// Depth-indexed separable forward model
//
//   I_c = sum_k PhiX_{k,c} * L_k * PhiY_{k,c}^T
//
// for a rig of cameras sharing one mask, one angular grid and one set of depth
// planes. Matrices are dense; M and N stay at a few hundred.

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "flatcam/optics.hpp"

namespace flatcam {

using Matrix = Eigen::MatrixXd;
using DepthMap = Eigen::MatrixXi;

/// Marks a pixel with no light in a structured volume view.
inline constexpr int kNoDepth = -1;

/// One sensor image per camera, indexed by camera.
using Measurements = std::vector<Matrix>;

/// Dense nx * ny * K real array stored as K slices. Slice k is indexed (x, y)
/// with x acting on the rows of PhiX and y on the rows of PhiY.
class Volume {
 public:
  Volume() = default;
  Volume(int nx, int ny, int n_depths);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int n_depths() const { return static_cast<int>(slices_.size()); }

  Matrix& slice(int k) { return slices_[static_cast<std::size_t>(k)]; }
  const Matrix& slice(int k) const { return slices_[static_cast<std::size_t>(k)]; }
  double& operator()(int x, int y, int k) { return slice(k)(x, y); }
  double operator()(int x, int y, int k) const { return slice(k)(x, y); }

  void set_zero();
  double squared_norm() const;
  double dot(const Volume& other) const;
  bool same_shape(const Volume& other) const;
  bool nonnegative() const;

  /// Sum over depth; the composite intensity a conventional camera would see.
  Matrix collapse() const;

  struct Structured {
    DepthMap depth_map;  // kNoDepth where the pixel is dark
    Matrix intensity;
  };
  /// Depth map + intensity view; empty when some pixel has light at two depths.
  std::optional<Structured> structured() const;

  static Volume from_structured(const DepthMap& depth_map, const Matrix& intensity, int n_depths);

 private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<Matrix> slices_;
};

/// A scene is a nonnegative volume with at most one lit depth per pixel.
using SceneVolume = Volume;
bool is_valid_scene(const SceneVolume& scene);

struct RigCamera {
  CameraGeometry geometry;
  CameraPose pose;
};

class SeparableOperator {
 public:
  struct AxisPair {
    Matrix x;  // M x N, acts on volume rows
    Matrix y;  // M x N, acts on volume columns
  };

  SeparableOperator(std::vector<RigCamera> cameras, DepthPlaneSet depths, AngularGrid grid,
                    std::vector<std::vector<AxisPair>> phi);

  int n_cameras() const { return static_cast<int>(cameras_.size()); }
  int n_depths() const { return depths_.size(); }
  int n_angles() const { return grid_.n_angles; }
  int n_sensor(int camera) const { return camera_(camera).geometry.n_sensor; }

  const std::vector<RigCamera>& cameras() const { return cameras_; }
  const DepthPlaneSet& depths() const { return depths_; }
  const AngularGrid& grid() const { return grid_; }
  const AxisPair& phi(int camera, int depth) const {
    return phi_[static_cast<std::size_t>(camera)][static_cast<std::size_t>(depth)];
  }

  Volume zero_volume() const { return Volume(n_angles(), n_angles(), n_depths()); }
  Measurements zero_measurements() const;

 private:
  const RigCamera& camera_(int c) const { return cameras_[static_cast<std::size_t>(c)]; }

  std::vector<RigCamera> cameras_;
  DepthPlaneSet depths_;
  AngularGrid grid_;
  std::vector<std::vector<AxisPair>> phi_;  // [camera][depth]
};

/// Phi_D(i, j) = mask((1 - d/D) s_i + d sin(theta_j)).
Matrix build_phi_1d(const CameraGeometry& cam, const MaskSpec& mask, double depth, const AngularGrid& grid);

/// Like build_phi_1d, but each column j uses the effective angle and depth of
/// the reference-plane point (theta_j, depth) seen from a posed camera.
Matrix build_phi_posed(const CameraGeometry& cam, const CameraPose& pose, const MaskSpec& mask,
                       double depth, const AngularGrid& grid);

/// Mean effective depth of the reference plane over the grid, seen from `pose`.
double mean_effective_depth(const CameraPose& pose, double depth, const AngularGrid& grid,
                            double mask_distance);

SeparableOperator build_operator(const std::vector<RigCamera>& cameras, const MaskSpec& mask,
                                 const DepthPlaneSet& depths, const AngularGrid& grid);

/// Measurements of `volume`. Depths are accumulated in ascending order; all-zero
/// slices are skipped (they contribute exactly zero).
Measurements forward(const SeparableOperator& op, const Volume& volume);

/// P_k = sum_c PhiX_{k,c}^T R_c PhiY_{k,c}. When `active` is given, only depths
/// with active[k] set are computed and the rest are left at zero.
Volume adjoint(const SeparableOperator& op, const Measurements& residual,
               const std::vector<bool>* active = nullptr);

/// Operator with every system matrix replaced by its column-mean-removed
/// version C*Phi (C = I - 11^T/M). Pairs with centered(Measurements): for any
/// volume, forward(centered(op), L) == centered(forward(op, L)).
SeparableOperator centered(const SeparableOperator& op);

/// Removes row and column means from each sensor image (C * I * C).
Measurements centered(const Measurements& images);

/// Explicit matrix of the operator for testing.
///
/// Convention (column-major vec): volume index = x + N*y + N*N*k; image rows are
/// stacked per camera with index = offset_c + i + M_c*j. Throws DomainError
/// if the matrix would exceed 1e7 entries.
Matrix densify(const SeparableOperator& op);

Eigen::VectorXd vectorize(const Volume& volume);
Volume unvectorize(const Eigen::VectorXd& v, int n, int n_depths);
Eigen::VectorXd vectorize(const Measurements& images);

double squared_norm(const Measurements& images);
double dot(const Measurements& a, const Measurements& b);
Measurements subtract(const Measurements& a, const Measurements& b);

}  // namespace flatcam
