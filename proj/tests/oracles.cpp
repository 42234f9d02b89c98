#include "oracles.hpp"

#include <cmath>

namespace oracle {

Eigen::MatrixXd phi_1d(const std::vector<std::uint8_t>& bits, double pitch, double offset, int n_sensor,
                       double sensor_pitch, double mask_distance, double depth, double theta_min,
                       double theta_max, int n_angles) {
  Eigen::MatrixXd phi(n_sensor, n_angles);
  const double magnification = 1.0 - mask_distance / depth;
  for (int j = 0; j < n_angles; ++j) {
    const double theta =
        j == n_angles - 1 ? theta_max : theta_min + j * (theta_max - theta_min) / (n_angles - 1);
    for (int i = 0; i < n_sensor; ++i) {
      const double s = (i - (n_sensor - 1) / 2.0) * sensor_pitch;
      const double u = magnification * s + mask_distance * std::sin(theta);
      const double cell = std::floor((u - offset) / pitch);
      const bool inside = cell >= 0 && cell < static_cast<double>(bits.size());
      phi(i, j) = inside ? bits[static_cast<std::size_t>(cell)] : 0.0;
    }
  }
  return phi;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::MatrixXd system_matrix(const flatcam::SeparableOperator& op) {
  const int n = op.n_angles();
  Eigen::Index rows = 0;
  for (int c = 0; c < op.n_cameras(); ++c) rows += Eigen::Index{op.n_sensor(c)} * op.n_sensor(c);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, Eigen::Index{n} * n * op.n_depths());
  Eigen::Index row = 0;
  for (int c = 0; c < op.n_cameras(); ++c) {
    const Eigen::Index m2 = Eigen::Index{op.n_sensor(c)} * op.n_sensor(c);
    for (int k = 0; k < op.n_depths(); ++k)
      a.block(row, Eigen::Index{k} * n * n, m2, Eigen::Index{n} * n) = kron(op.phi(c, k).y, op.phi(c, k).x);
    row += m2;
  }
  return a;
}

Eigen::VectorXd stack(const flatcam::Volume& v) {
  Eigen::VectorXd out(Eigen::Index{v.nx()} * v.ny() * v.n_depths());
  Eigen::Index i = 0;
  for (int k = 0; k < v.n_depths(); ++k)
    for (int y = 0; y < v.ny(); ++y)
      for (int x = 0; x < v.nx(); ++x) out(i++) = v(x, y, k);
  return out;
}

Eigen::VectorXd stack(const flatcam::Measurements& images) {
  Eigen::Index total = 0;
  for (const auto& img : images) total += img.size();
  Eigen::VectorXd out(total);
  Eigen::Index i = 0;
  for (const auto& img : images)
    for (Eigen::Index col = 0; col < img.cols(); ++col)
      for (Eigen::Index r = 0; r < img.rows(); ++r) out(i++) = img(r, col);
  return out;
}

flatcam::Volume unstack(const Eigen::VectorXd& v, int n, int n_depths) {
  flatcam::Volume out(n, n, n_depths);
  Eigen::Index i = 0;
  for (int k = 0; k < n_depths; ++k)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) out(x, y, k) = v(i++);
  return out;
}

Eigen::VectorXd masked_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                     const std::vector<bool>& selected) {
  std::vector<Eigen::Index> columns;
  for (std::size_t j = 0; j < selected.size(); ++j)
    if (selected[j]) columns.push_back(static_cast<Eigen::Index>(j));
  Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = a.col(columns[j]);
  const Eigen::VectorXd coeffs = sub.completeOrthogonalDecomposition().solve(b);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.cols());
  for (std::size_t j = 0; j < columns.size(); ++j) out(columns[j]) = coeffs(static_cast<Eigen::Index>(j));
  return out;
}

Eigen::MatrixXd centering(int m) {
  return Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / m);
}

std::vector<long double> harmonic_depths(long double d_min, long double d_max, int count) {
  std::vector<long double> out;
  for (int k = 0; k < count; ++k) {
    const long double inv = 1.0L / d_max + k * (1.0L / d_min - 1.0L / d_max) / (count - 1);
    out.push_back(1.0L / inv);
  }
  return out;
}

double psnr(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& estimate, double peak) {
  long double sum = 0.0L;
  for (Eigen::Index j = 0; j < reference.cols(); ++j)
    for (Eigen::Index i = 0; i < reference.rows(); ++i) {
      const long double e = static_cast<long double>(reference(i, j)) - estimate(i, j);
      sum += e * e;
    }
  const long double mse = sum / reference.size();
  return static_cast<double>(10.0L * std::log10(static_cast<long double>(peak) * peak / mse));
}

}  // namespace oracle
