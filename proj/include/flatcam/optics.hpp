#pragma once

// Physical description of a mask-based lensless camera: the binary mask, the
// sensor/mask geometry, the angular scene grid, and the depth planes.
//
// Units: lengths in millimetres, angles in radians.

#include <cmath>
#include <cstdint>
#include <vector>

namespace flatcam {

/// 1D binary mask. The 2D mask is the outer product of this pattern with itself.
struct MaskSpec {
  std::vector<std::uint8_t> bits;  // 0 = opaque, 1 = transparent
  double pitch = 0.0;              // feature width
  double offset = 0.0;             // left edge of feature 0
  std::uint64_t seed = 0;
  bool symmetric = false;

  double extent() const { return static_cast<double>(bits.size()) * pitch; }
  std::size_t ones() const;
  void validate() const;
};

struct CameraGeometry {
  int n_sensor = 0;           // pixels per axis (M)
  double sensor_pitch = 0.0;  // mm
  double mask_distance = 0.0; // d, mm

  /// Pixel-centre coordinate s_i = (i - (M-1)/2) * pitch.
  double pixel_coordinate(int i) const;
  void validate() const;
};

/// Pose of a camera in the reference camera's frame. Yaw rotates about the
/// vertical axis; translation is (x, z) of the camera origin.
struct CameraPose {
  double yaw = 0.0;
  double tx = 0.0;
  double tz = 0.0;

  bool is_identity() const { return yaw == 0.0 && tx == 0.0 && tz == 0.0; }
  void validate() const;
};

struct AngularGrid {
  int n_angles = 0;
  double theta_min = 0.0;
  double theta_max = 0.0;

  double angle(int j) const;
  void validate() const;
};

/// Depth planes ordered farthest first (depths[0] = D_max).
struct DepthPlaneSet {
  std::vector<double> depths;
  std::vector<double> slopes;  // d / depths[k], uniformly spaced
  double mask_distance = 0.0;

  int size() const { return static_cast<int>(depths.size()); }
};

/// Transparency at mask-plane coordinate u; 0 outside the mask.
int mask_transparency(const MaskSpec& mask, double u);

/// Pseudorandom Bernoulli(1/2) mask centred on the optical axis. With
/// `symmetric`, the first ceil(n/2) bits are drawn and mirrored.
MaskSpec generate_mask(int n_features, double pitch, std::uint64_t seed, bool symmetric);

/// Lightfield slope q = d / D. Shadow magnification is 1 - q.
double lightfield_slope(double mask_distance, double depth);

/// K planes with uniformly spaced lightfield slopes between d/D_max and d/D_min.
DepthPlaneSet sample_depth_planes(double mask_distance, double depth_min, double depth_max, int count);

struct EffectiveView {
  double theta = 0.0;  // angle in the camera frame
  double depth = 0.0;  // perpendicular distance to the camera sensor plane
};

/// Maps the reference-frame point at (theta_ref, depth_ref) into the camera
/// frame given by `pose`. Throws DomainError when the point is not in front of
/// the mask plane (z' <= mask_distance).
EffectiveView effective_view(const CameraPose& pose, double theta_ref, double depth_ref,
                             double mask_distance);

/// Mask-plane coordinate seen from sensor position s by a source at (theta, depth).
inline double mask_coordinate(double s, double theta, double depth, double mask_distance) {
  return (1.0 - mask_distance / depth) * s + mask_distance * std::sin(theta);
}

}  // namespace flatcam
