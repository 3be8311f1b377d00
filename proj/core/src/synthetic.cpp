#include "rotascore/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "rotascore/errors.hpp"
#include "rotascore/rng.hpp"

namespace rotascore {

namespace {

double clamp_unit(double u) { return std::clamp(u, 1e-15, 1.0 - 1e-15); }

double logit(double u) { return std::log(u / (1.0 - u)); }

}  // namespace

void SynthConfig::validate() const {
  if (n_entities < 2) throw std::invalid_argument("synthetic: n_entities must be >= 2");
  if (!(fraud_rate > 0.0) || !(fraud_rate < 1.0)) {
    throw std::invalid_argument("synthetic: fraud_rate must be in (0, 1)");
  }
  if (!(burst_strength >= 0.0)) throw std::invalid_argument("synthetic: burst_strength must be >= 0");
  if (!(mean_len >= 2.0)) throw std::invalid_argument("synthetic: mean_len must be >= 2");
  if (max_seq_len < 2) throw std::invalid_argument("synthetic: max_seq_len must be >= 2");
  if (base_features < 2) throw std::invalid_argument("synthetic: base_features must be >= 2");
  if (!(tempo_seconds > 0.0)) throw std::invalid_argument("synthetic: tempo_seconds must be > 0");
  if (!(tempo_spread >= 0.0)) throw std::invalid_argument("synthetic: tempo_spread must be >= 0");
  if (!(burst_window > 0.0)) throw std::invalid_argument("synthetic: burst_window must be > 0");
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_entities;

  Dataset ds;
  ds.feature_dim = cfg.base_features + 1;
  ds.sequences.resize(n);

  // Pass 1: timings and base features, one independent stream per entity so
  // the draw order is insensitive to refactors.
  std::vector<double> burst(n), risk(n);
  for (int e = 0; e < n; ++e) {
    Rng rng(Rng::mix(Rng::mix(cfg.seed, 0x656e7469), static_cast<std::uint64_t>(e)));

    int len = 2 + static_cast<int>(std::floor(rng.exponential(cfg.mean_len - 2.0)));
    len = std::clamp(len, 2, cfg.max_seq_len);

    const double tempo = cfg.tempo_seconds * std::exp(cfg.tempo_spread * rng.normal());
    Sequence& seq = ds.sequences[e];
    char id[16];
    std::snprintf(id, sizeof(id), "E%06d", e);
    seq.entity_id = id;
    seq.tokens.resize(len);

    double t = rng.uniform() * 86400.0 * 30.0;
    for (int i = 0; i < len; ++i) {
      if (i > 0) t += rng.exponential(tempo);
      TransactionToken& tok = seq.tokens[i];
      tok.timestamp = t;
      tok.label = 0;
      tok.features.resize(ds.feature_dim, 0.0);
      for (int j = 0; j < cfg.base_features; ++j) tok.features[j] = rng.normal();
    }

    // Trailing-burst score: how much recent history sits within the window of
    // the final transaction. Lives purely in the raw timing.
    const double t_last = seq.tokens.back().timestamp;
    double b = 0.0;
    for (int i = 0; i + 1 < len; ++i) {
      b += std::exp(-(t_last - seq.tokens[i].timestamp) / cfg.burst_window);
    }
    burst[e] = b;
    risk[e] = seq.tokens.back().features[0];
  }

  // Standardize the burst score so burst_strength acts on a unit scale.
  double b_mean = 0.0;
  for (double b : burst) b_mean += b;
  b_mean /= n;
  double b_var = 0.0;
  for (double b : burst) b_var += (b - b_mean) * (b - b_mean);
  const double b_std = std::max(std::sqrt(b_var / n), 1e-12);

  // Pass 2: labels. Each entity gets a log-odds threshold; lowering it with
  // the burst/risk signal makes fraud more likely there. Selecting the
  // target-count smallest thresholds calibrates the positive rate exactly
  // while keeping the labels a random function of the planted signals.
  Rng label_rng(Rng::mix(cfg.seed, 0x6c61626c));
  std::vector<double> threshold(n);
  for (int e = 0; e < n; ++e) {
    const double z = (burst[e] - b_mean) / b_std;
    const double eta = cfg.burst_strength * z + cfg.feature_signal * risk[e];
    threshold[e] = logit(clamp_unit(label_rng.uniform_pos())) - eta;
  }
  const long long target = std::clamp<long long>(
      std::llround(cfg.fraud_rate * static_cast<double>(n)), 1, n - 1);
  std::vector<double> sorted = threshold;
  std::nth_element(sorted.begin(), sorted.begin() + (target - 1), sorted.end());
  const double cut = sorted[target - 1];

  for (int e = 0; e < n; ++e) {
    if (threshold[e] <= cut) {
      Sequence& seq = ds.sequences[e];
      seq.tokens.back().label = 1;
      seq.tokens.back().features[1] += cfg.fraud_shift;
    }
  }

  // Pass 3: append the standardized inter-transaction gap channel (first token
  // gap is 0), using global moments like the ingest featurizer does.
  double g_sum = 0.0, g_sq = 0.0;
  long long g_n = 0;
  for (const auto& seq : ds.sequences) {
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      const double gap = i == 0 ? 0.0 : seq.tokens[i].timestamp - seq.tokens[i - 1].timestamp;
      g_sum += gap;
      g_sq += gap * gap;
      ++g_n;
    }
  }
  const double g_mean = g_sum / static_cast<double>(g_n);
  const double g_std =
      std::max(std::sqrt(std::max(0.0, g_sq / static_cast<double>(g_n) - g_mean * g_mean)), 1e-6);
  for (auto& seq : ds.sequences) {
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      const double gap = i == 0 ? 0.0 : seq.tokens[i].timestamp - seq.tokens[i - 1].timestamp;
      seq.tokens[i].features[cfg.base_features] = (gap - g_mean) / g_std;
    }
  }

  ds.validate();
  return ds;
}

}  // namespace rotascore
