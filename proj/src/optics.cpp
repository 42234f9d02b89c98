#include "flatcam/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "flatcam/errors.hpp"
#include "flatcam/rng.hpp"

namespace flatcam {

std::size_t MaskSpec::ones() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

void MaskSpec::validate() const {
  if (bits.empty()) throw ValidationError("mask must have at least one feature");
  for (auto b : bits)
    if (b > 1) throw ValidationError("mask bits must be 0 or 1");
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw ValidationError("mask pitch must be > 0");
  if (!std::isfinite(offset) || !std::isfinite(extent()))
    throw ValidationError("mask offset/extent must be finite");
}

double CameraGeometry::pixel_coordinate(int i) const {
  return (static_cast<double>(i) - 0.5 * static_cast<double>(n_sensor - 1)) * sensor_pitch;
}

void CameraGeometry::validate() const {
  if (n_sensor < 1) throw ValidationError("n_sensor must be >= 1");
  if (!(sensor_pitch > 0.0)) throw ValidationError("sensor_pitch must be > 0");
  if (!(mask_distance > 0.0)) throw ValidationError("mask_distance must be > 0");
}

void CameraPose::validate() const {
  if (!(std::abs(yaw) < std::numbers::pi / 2))
    throw ValidationError("camera yaw must satisfy |yaw| < pi/2");
  if (!std::isfinite(tx) || !std::isfinite(tz)) throw ValidationError("camera translation must be finite");
}

double AngularGrid::angle(int j) const {
  if (j == n_angles - 1) return theta_max;
  return theta_min + static_cast<double>(j) * (theta_max - theta_min) / static_cast<double>(n_angles - 1);
}

void AngularGrid::validate() const {
  const double half_pi = std::numbers::pi / 2;
  if (n_angles < 2) throw ValidationError("angular grid needs N >= 2");
  if (!(-half_pi < theta_min && theta_min < theta_max && theta_max < half_pi))
    throw ValidationError("angular grid must satisfy -pi/2 < theta_min < theta_max < pi/2");
}

int mask_transparency(const MaskSpec& mask, double u) {
  const double rel = (u - mask.offset) / mask.pitch;
  if (!(rel >= 0.0)) return 0;  // also rejects NaN
  const double index = std::floor(rel);
  if (index >= static_cast<double>(mask.bits.size())) return 0;
  return mask.bits[static_cast<std::size_t>(index)];
}

MaskSpec generate_mask(int n_features, double pitch, std::uint64_t seed, bool symmetric) {
  if (n_features < 1) throw ValidationError("n_features must be >= 1");
  if (!(pitch > 0.0)) throw ValidationError("mask pitch must be > 0");

  MaskSpec mask;
  mask.pitch = pitch;
  mask.seed = seed;
  mask.symmetric = symmetric;
  mask.offset = -static_cast<double>(n_features) * pitch / 2.0;
  mask.bits.resize(static_cast<std::size_t>(n_features));

  Xoshiro256 rng(seed);
  const auto n = static_cast<std::size_t>(n_features);
  const std::size_t drawn = symmetric ? (n + 1) / 2 : n;
  for (std::size_t i = 0; i < drawn; ++i) mask.bits[i] = static_cast<std::uint8_t>(rng.next() >> 63);
  if (symmetric)
    for (std::size_t i = drawn; i < n; ++i) mask.bits[i] = mask.bits[n - 1 - i];
  return mask;
}

double lightfield_slope(double mask_distance, double depth) {
  if (!(mask_distance > 0.0) || !(depth > mask_distance))
    throw DomainError("lightfield_slope requires depth > mask_distance > 0");
  return mask_distance / depth;
}

DepthPlaneSet sample_depth_planes(double mask_distance, double depth_min, double depth_max, int count) {
  if (!(mask_distance > 0.0) || !(mask_distance < depth_min) || !(depth_min < depth_max) ||
      !std::isfinite(depth_max))
    throw DomainError("depth sampling requires 0 < d < D_min < D_max < inf");
  if (count < 1) throw DomainError("depth sampling requires K >= 1");

  DepthPlaneSet set;
  set.mask_distance = mask_distance;
  if (count == 1) {
    set.depths = {depth_max};
    set.slopes = {mask_distance / depth_max};
    return set;
  }

  const double q_min = mask_distance / depth_max;
  const double q_max = mask_distance / depth_min;
  const double step = (q_max - q_min) / static_cast<double>(count - 1);
  set.depths.resize(static_cast<std::size_t>(count));
  set.slopes.resize(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double q = (k == count - 1) ? q_max : q_min + static_cast<double>(k) * step;
    set.slopes[static_cast<std::size_t>(k)] = q;
    set.depths[static_cast<std::size_t>(k)] = mask_distance / q;
  }
  // Endpoints are the requested range exactly, not a reciprocal round trip.
  set.depths.front() = depth_max;
  set.depths.back() = depth_min;
  return set;
}

EffectiveView effective_view(const CameraPose& pose, double theta_ref, double depth_ref,
                             double mask_distance) {
  const double px = depth_ref * std::tan(theta_ref) - pose.tx;
  const double pz = depth_ref - pose.tz;
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  // Camera axes expressed in the reference frame: x' = (c, -s), z' = (s, c).
  const double xc = c * px - s * pz;
  const double zc = s * px + c * pz;
  if (!(zc > mask_distance))
    throw DomainError("scene point at depth " + std::to_string(zc) +
                      " mm is not in front of the camera mask");
  return {std::atan(xc / zc), zc};
}

}  // namespace flatcam
