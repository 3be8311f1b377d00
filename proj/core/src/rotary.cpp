#include "rotascore/rotary.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rotascore {

FrequencySchedule frequency_schedule(int head_dim, double base) {
  if (head_dim < 2 || head_dim % 2 != 0) {
    throw std::invalid_argument("frequency_schedule: head_dim must be even and >= 2, got " +
                                std::to_string(head_dim));
  }
  if (!(base > 1.0)) {
    throw std::invalid_argument("frequency_schedule: base must be > 1, got " + std::to_string(base));
  }
  FrequencySchedule sched;
  sched.head_dim = head_dim;
  sched.base = base;
  sched.omegas.resize(head_dim / 2);
  for (int k = 0; k < head_dim / 2; ++k) {
    sched.omegas[k] = std::pow(base, -2.0 * k / head_dim);
  }
  return sched;
}

RotationAngles rope_angles(long long position, const FrequencySchedule& sched) {
  RotationAngles thetas(sched.omegas.size());
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    thetas[k] = static_cast<double>(position) * sched.omegas[k];
  }
  return thetas;
}

RotationAngles redre_angles(double delta_t, const FrequencySchedule& sched, double tau) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("redre_angles: tau must be > 0, got " + std::to_string(tau));
  }
  if (!std::isfinite(delta_t)) {
    throw std::invalid_argument("redre_angles: delta_t must be finite");
  }
  const double d = delta_t / tau;
  RotationAngles thetas(sched.omegas.size());
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    thetas[k] = d * sched.omegas[k];
  }
  return thetas;
}

std::vector<double> rotate_pairs(std::span<const double> v, std::span<const double> angles) {
  if (v.size() != 2 * angles.size()) {
    throw std::invalid_argument("rotate_pairs: vector length " + std::to_string(v.size()) +
                                " does not match 2 * " + std::to_string(angles.size()) + " angles");
  }
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const double c = std::cos(angles[k]);
    const double s = std::sin(angles[k]);
    out[2 * k] = c * v[2 * k] - s * v[2 * k + 1];
    out[2 * k + 1] = s * v[2 * k] + c * v[2 * k + 1];
  }
  return out;
}

Matrix build_rotation_matrix(std::span<const double> angles) {
  if (angles.empty()) {
    throw std::invalid_argument("build_rotation_matrix: empty angle list");
  }
  const int d = static_cast<int>(2 * angles.size());
  Matrix r(d, d);
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const double c = std::cos(angles[k]);
    const double s = std::sin(angles[k]);
    const int i = static_cast<int>(2 * k);
    r(i, i) = c;
    r(i, i + 1) = -s;
    r(i + 1, i) = s;
    r(i + 1, i + 1) = c;
  }
  return r;
}

Matrix rotate_rows_pairwise(const Matrix& x, const Matrix& angles, bool invert) {
  if (angles.rows() != x.rows() || angles.cols() * 2 != x.cols()) {
    throw std::invalid_argument("rotate_rows_pairwise: angles " + angles.shape_str() +
                                " do not match input " + x.shape_str());
  }
  Matrix out(x.rows(), x.cols());
  const double sign = invert ? -1.0 : 1.0;
  for (int i = 0; i < x.rows(); ++i) {
    const auto xi = x.row(i);
    const auto ai = angles.row(i);
    auto oi = out.row(i);
    for (int k = 0; k < angles.cols(); ++k) {
      const double c = std::cos(ai[k]);
      const double s = sign * std::sin(ai[k]);
      oi[2 * k] = c * xi[2 * k] - s * xi[2 * k + 1];
      oi[2 * k + 1] = s * xi[2 * k] + c * xi[2 * k + 1];
    }
  }
  return out;
}

}  // namespace rotascore
