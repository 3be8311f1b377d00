#include "rotascore/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace rotascore {

GradReport finite_difference_check(const std::function<double()>& loss,
                                   std::span<const Matrix> analytic,
                                   std::span<const NamedParam> params, double eps) {
  if (!(eps > 0.0) || eps > 1e-2) {
    throw std::invalid_argument("finite_difference_check: eps must be in (0, 1e-2]");
  }
  if (analytic.size() != params.size()) {
    throw std::invalid_argument("finite_difference_check: gradient/parameter count mismatch");
  }

  GradReport report;
  report.eps = eps;

  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& theta = *params[p].value;
    const Matrix& g_ad = analytic[p];
    if (!theta.same_shape(g_ad)) {
      throw std::invalid_argument("finite_difference_check: gradient shape mismatch for " +
                                  params[p].name);
    }
    for (int r = 0; r < theta.rows(); ++r) {
      for (int c = 0; c < theta.cols(); ++c) {
        const double saved = theta(r, c);
        theta(r, c) = saved + eps;
        const double f_plus = loss();
        theta(r, c) = saved - eps;
        const double f_minus = loss();
        theta(r, c) = saved;

        const std::string coord =
            params[p].name + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
        if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
          report.loss_finite = false;
          report.bad_probe = coord;
          return report;
        }
        const double g_fd = (f_plus - f_minus) / (2.0 * eps);
        const double g = g_ad(r, c);
        const double denom = std::max({std::abs(g), std::abs(g_fd), 1e-8});
        const double rel = std::abs(g - g_fd) / denom;
        if (rel > report.max_rel_error) {
          report.max_rel_error = rel;
          report.worst_param = coord;
        }
      }
    }
  }
  return report;
}

}  // namespace rotascore
