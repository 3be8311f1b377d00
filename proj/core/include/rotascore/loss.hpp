#pragma once

namespace rotascore {

/// Numerically stable sigmoid.
double sigmoid(double x);

/// log(1 + e^x) computed as max(x, 0) + log1p(e^-|x|); never overflows.
double softplus(double x);

/// Positive-class weight from split counts: n_neg / n_pos. Rejects n_pos == 0.
double pos_weight_from_counts(long long n_neg, long long n_pos);

/// Class-weighted binary cross-entropy on a raw logit:
///   -[w * y * log(sigmoid(z)) + (1 - y) * log(1 - sigmoid(z))]
/// in log-sum-exp form, so the result is finite for any finite logit.
double weighted_bce(double logit, int label, double pos_weight);

/// d(weighted_bce)/d(logit): w * (sigmoid(z) - 1) for y = 1, sigmoid(z) for y = 0.
double weighted_bce_grad(double logit, int label, double pos_weight);

}  // namespace rotascore
