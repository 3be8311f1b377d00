#pragma once

#include <span>
#include <vector>

#include "rotascore/matrix.hpp"

namespace rotascore {

/// Per-pair angular frequencies for rotary encoding. omegas[k] follows the
/// geometric schedule base^(-2k/head_dim), so omegas[0] == 1 and the list is
/// strictly decreasing: fast pairs resolve short distances, slow pairs cover
/// long horizons.
struct FrequencySchedule {
  int head_dim = 0;  // even, >= 2
  double base = 0.0;
  std::vector<double> omegas;  // length head_dim / 2
};

using RotationAngles = std::vector<double>;

/// Builds the schedule; rejects odd head_dim (pairwise rotation needs pairs)
/// and base <= 1.
FrequencySchedule frequency_schedule(int head_dim, double base);

/// Absolute-position angles: thetas[k] = position * omegas[k]. The position is
/// signed so relative offsets m - n can be encoded directly.
RotationAngles rope_angles(long long position, const FrequencySchedule& sched);

/// Time-distance angles: thetas[k] = (delta_t / tau) * omegas[k], with delta_t
/// in seconds and tau the time scale of the fastest pair. Negative delta_t is
/// a well-defined backward rotation; non-finite delta_t is rejected.
RotationAngles redre_angles(double delta_t, const FrequencySchedule& sched, double tau);

/// Rotates each adjacent pair (v[2i], v[2i+1]) by angles[i]:
///   v'[2i]   = cos(a) * v[2i] - sin(a) * v[2i+1]
///   v'[2i+1] = sin(a) * v[2i] + cos(a) * v[2i+1]
std::vector<double> rotate_pairs(std::span<const double> v, std::span<const double> angles);

/// Full block-diagonal rotation matrix with 2x2 blocks R(angles[k]) on the
/// diagonal. Test oracle for the pairwise fast path; O(d^2) storage.
Matrix build_rotation_matrix(std::span<const double> angles);

/// Rotates every row i of x by angles.row(i). x is N x d, angles is N x d/2.
/// With invert set, applies the transpose rotation (angle negation); this is
/// also the backward map of the forward rotation.
Matrix rotate_rows_pairwise(const Matrix& x, const Matrix& angles, bool invert = false);

}  // namespace rotascore
