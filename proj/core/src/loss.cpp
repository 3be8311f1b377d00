#include "rotascore/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rotascore {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double pos_weight_from_counts(long long n_neg, long long n_pos) {
  if (n_pos < 1) {
    throw std::invalid_argument("pos_weight_from_counts: no positive samples to weight");
  }
  if (n_neg < 0) {
    throw std::invalid_argument("pos_weight_from_counts: negative count");
  }
  return static_cast<double>(n_neg) / static_cast<double>(n_pos);
}

double weighted_bce(double logit, int label, double pos_weight) {
  if (!(pos_weight > 0.0)) {
    throw std::invalid_argument("weighted_bce: pos_weight must be > 0, got " + std::to_string(pos_weight));
  }
  if (label != 0 && label != 1) {
    throw std::invalid_argument("weighted_bce: label must be 0 or 1, got " + std::to_string(label));
  }
  // -log(sigmoid(z)) == softplus(-z); -log(1 - sigmoid(z)) == softplus(z).
  return label == 1 ? pos_weight * softplus(-logit) : softplus(logit);
}

double weighted_bce_grad(double logit, int label, double pos_weight) {
  if (!(pos_weight > 0.0)) {
    throw std::invalid_argument("weighted_bce_grad: pos_weight must be > 0");
  }
  const double s = sigmoid(logit);
  return label == 1 ? pos_weight * (s - 1.0) : s;
}

}  // namespace rotascore
