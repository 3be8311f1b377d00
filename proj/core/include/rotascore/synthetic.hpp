#pragma once

#include <cstdint>

#include "rotascore/dataset.hpp"

namespace rotascore {

/// Knobs for the synthetic transaction stream. Each entity becomes one
/// sequence: exponential inter-arrival gaps around a per-entity tempo and
/// i.i.d. normal features. The last token's fraud probability rises with
/// (a) a feature-level risk score visible to every model and, when
/// burst_strength > 0, (b) how bursty its trailing gaps are. The burst signal
/// lives purely in the timestamps — the feature vectors carry no gap channel —
/// so a model can only reach it through time-aware attention. With
/// burst_strength = 0 the labels are independent of the gaps.
struct SynthConfig {
  int n_entities = 1000;
  double mean_len = 10.0;       // average transactions per entity
  double fraud_rate = 0.035;    // target positive rate, calibrated exactly
  double burst_strength = 1.0;  // >= 0; weight of the timing signal in the label log-odds
  std::uint64_t seed = 1;
  int max_seq_len = 32;
  int base_features = 6;           // feature vector width
  double tempo_seconds = 3600.0;   // median inter-arrival gap
  double tempo_spread = 0.35;      // log-normal sigma of per-entity tempo
  double burst_window = 5400.0;    // seconds; horizon of the trailing-burst score
  int burst_tokens = 6;            // trailing history tokens scored for burstiness
  double feature_signal = 0.8;     // weight of the feature-level risk score
  double fraud_shift = 0.6;        // class-conditional shift added to one last-token channel

  void validate() const;  // throws std::invalid_argument
};

/// Deterministic per seed. The returned dataset has feature_dim =
/// base_features and no pinned split.
Dataset generate_synthetic(const SynthConfig& cfg);

}  // namespace rotascore
