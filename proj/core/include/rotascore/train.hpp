#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rotascore/dataset.hpp"
#include "rotascore/encoder.hpp"
#include "rotascore/metrics.hpp"

namespace rotascore {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 6;
  std::uint64_t seed = 42;
  std::optional<double> pos_weight_override;  // unset -> n_neg / n_pos from the train split
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double valid_fraction = 0.2;

  void validate() const;  // throws std::invalid_argument
};

/// Adam first/second moment estimates, one slot per named parameter tensor.
struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long long t = 0;

  static AdamState init(const EncoderParams& params);
};

/// One bias-corrected Adam update. `grads` must align with params.named().
void adam_step(EncoderParams& params, std::span<const Matrix> grads, AdamState& state,
               const TrainConfig& cfg);

/// Per-epoch record. valid_auc is -1 when the validation side has a single
/// class (AUC undefined). wall_time_s is informational and never serialized
/// into deterministic artifacts.
struct EpochStats {
  double mean_train_loss = 0.0;
  double valid_auc = -1.0;
  double wall_time_s = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

/// Delimited text table: epoch, train_loss, valid_auc and optionally wall
/// time. Deterministic when include_wall_time is false.
std::string history_to_tsv(const TrainHistory& history, bool include_wall_time);

struct TrainResult {
  EncoderParams params;  // snapshot with the best validation AUC
  TrainHistory history;
  double pos_weight = 1.0;
  int best_epoch = -1;  // 0-based; -1 if validation AUC was never defined
};

/// Full training loop: shuffled mini-batches (order a pure function of seed
/// and epoch index), class-weighted BCE, Adam, per-epoch validation AUC, and
/// best-epoch parameter selection. Rejects a single-class training set.
/// Deterministic: (seed, data, config) -> bitwise-identical parameters.
TrainResult train(std::span<const Sequence> train_set, std::span<const Sequence> valid_set,
                  const EncoderConfig& encoder_cfg, const TrainConfig& train_cfg);

/// Scores every sequence (last-token logit), computes the ROC curve and both
/// AUC paths, and enforces their agreement to 1e-9 — a disagreement is an
/// internal-consistency failure. seed and config_digest are stamped into the
/// report as metadata.
EvalReport evaluate(const EncoderConfig& encoder_cfg, const EncoderParams& params,
                    std::span<const Sequence> seqs, std::uint64_t seed,
                    const std::string& config_digest);

/// Train/valid membership per sequence index. Honors split tags pinned in the
/// dataset; otherwise splits at the entity level from (valid_fraction, seed).
struct SplitIndices {
  std::vector<int> train;
  std::vector<int> valid;
};
SplitIndices resolve_split(const Dataset& ds, double valid_fraction, std::uint64_t seed);

/// Copies the indexed sequences out of the dataset.
std::vector<Sequence> gather(const Dataset& ds, std::span<const int> indices);

/// One mode's outcome inside the three-way comparison.
struct CompareResult {
  PositionMode mode;
  EncoderParams params;
  TrainHistory history;
  EvalReport report;
  double pos_weight = 1.0;
};

/// The comparison protocol: trains SINUSOIDAL (additive baseline), ROPE and
/// REDRE on the identical split with identical hyperparameters and evaluates
/// each on the validation side.
std::vector<CompareResult> compare_models(const Dataset& ds, EncoderConfig encoder_cfg,
                                          const TrainConfig& train_cfg,
                                          const std::string& config_digest);

/// Human-readable comparison table with one row per mode; stable column and
/// row order.
std::string comparison_table(std::span<const CompareResult> results);

}  // namespace rotascore
