#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rotascore {

/// Scores (raw logits are fine; AUC is rank-based) paired with 0/1 labels.
struct ScoredSet {
  std::vector<double> scores;
  std::vector<int> labels;

  long long positives() const;
  long long negatives() const;
  void validate_for_auc() const;  // nonempty, aligned, both classes present
};

using RocPoint = std::pair<double, double>;  // (fpr, tpr)

/// ROC curve with thresholds swept over the distinct scores descending and
/// ties grouped at a single threshold. Starts at (0,0), ends at (1,1).
std::vector<RocPoint> roc_curve(const ScoredSet& s);

/// Trapezoidal area under a curve produced by roc_curve().
double auc_trapezoid(std::span<const RocPoint> points);

/// Mann-Whitney statistic: fraction of (positive, negative) pairs ordered
/// correctly, ties counted 1/2. Independent of the curve path; the two must
/// agree to ~1e-9.
double auc_rank(const ScoredSet& s);

/// One evaluation run. wall_time_s is runtime metadata and is deliberately
/// excluded from the serialized report so identical runs produce identical
/// files.
struct EvalReport {
  std::string mode;
  std::uint64_t seed = 0;
  std::string config_digest;
  long long n_pos = 0;
  long long n_neg = 0;
  double auc = 0.0;
  std::vector<RocPoint> roc;
  double wall_time_s = 0.0;
};

std::string report_to_json(const EvalReport& r);
EvalReport report_from_json(const std::string& text);
void save_report(const EvalReport& r, const std::string& path);
EvalReport load_report(const std::string& path);

/// Two-column "fpr\ttpr" text file for external plotting.
void save_roc_points(std::span<const RocPoint> points, const std::string& path);

}  // namespace rotascore
