#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rotascore/matrix.hpp"

namespace rotascore {

/// Result of comparing reverse-mode gradients against central differences.
struct GradReport {
  double max_rel_error = 0.0;
  std::string worst_param;  // "name[r,c]" of the worst coordinate
  double eps = 0.0;
  bool loss_finite = true;     // false if a probe produced a non-finite loss
  std::string bad_probe;       // coordinate of the offending probe, if any
  bool passed(double tol) const { return loss_finite && max_rel_error < tol; }
};

struct NamedParam {
  std::string name;
  Matrix* value = nullptr;
};

/// Central-difference check: perturbs every parameter coordinate by +/- eps,
/// evaluates `loss`, and compares (f+ - f-) / (2 eps) against `analytic`,
/// which must hold the reverse-mode gradients in `params` order, evaluated at
/// the unperturbed point. Relative error per coordinate is
///   |g_ad - g_fd| / max(|g_ad|, |g_fd|, 1e-8).
/// The checker is independent of the tape: it only calls `loss`.
/// eps must lie in (0, 1e-2].
GradReport finite_difference_check(const std::function<double()>& loss,
                                   std::span<const Matrix> analytic,
                                   std::span<const NamedParam> params, double eps);

}  // namespace rotascore
