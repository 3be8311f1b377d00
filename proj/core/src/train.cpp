#include "rotascore/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "rotascore/errors.hpp"
#include "rotascore/graph.hpp"
#include "rotascore/loss.hpp"
#include "rotascore/rng.hpp"

namespace rotascore {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Matrix features_matrix(const Sequence& seq, int feature_dim) {
  Matrix x(static_cast<int>(seq.tokens.size()), feature_dim);
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    const auto& f = seq.tokens[i].features;
    if (static_cast<int>(f.size()) != feature_dim) {
      throw std::invalid_argument("sequence feature width does not match the model");
    }
    std::copy(f.begin(), f.end(), x.row(static_cast<int>(i)).begin());
  }
  return x;
}

std::vector<double> timestamps_of(const Sequence& seq) {
  std::vector<double> t;
  t.reserve(seq.tokens.size());
  for (const auto& tok : seq.tokens) t.push_back(tok.timestamp);
  return t;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(beta1 > 0.0) || !(beta1 < 1.0) || !(beta2 > 0.0) || !(beta2 < 1.0)) {
    throw std::invalid_argument("train: adam betas must lie in (0, 1)");
  }
  if (!(adam_eps > 0.0)) throw std::invalid_argument("train: adam_eps must be > 0");
  if (!(valid_fraction > 0.0) || !(valid_fraction < 1.0)) {
    throw std::invalid_argument("train: valid_fraction must be in (0, 1)");
  }
  if (pos_weight_override && !(*pos_weight_override > 0.0)) {
    throw std::invalid_argument("train: pos_weight override must be > 0");
  }
}

AdamState AdamState::init(const EncoderParams& params) {
  AdamState state;
  for (const auto& [name, tensor] : params.named()) {
    (void)name;
    state.m.emplace_back(tensor->rows(), tensor->cols());
    state.v.emplace_back(tensor->rows(), tensor->cols());
  }
  return state;
}

void adam_step(EncoderParams& params, std::span<const Matrix> grads, AdamState& state,
               const TrainConfig& cfg) {
  auto named = params.named();
  if (grads.size() != named.size() || state.m.size() != named.size()) {
    throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t p = 0; p < named.size(); ++p) {
    Matrix& theta = *named[p].second;
    const Matrix& g = grads[p];
    if (!theta.same_shape(g)) {
      throw std::invalid_argument("adam_step: gradient shape mismatch for " + named[p].first);
    }
    Matrix& m = state.m[p];
    Matrix& v = state.v[p];
    double* mp = m.data().data();
    double* vp = v.data().data();
    double* tp = theta.data().data();
    const double* gp = g.data().data();
    const std::size_t n = theta.size();
    for (std::size_t i = 0; i < n; ++i) {
      mp[i] = cfg.beta1 * mp[i] + (1.0 - cfg.beta1) * gp[i];
      vp[i] = cfg.beta2 * vp[i] + (1.0 - cfg.beta2) * gp[i] * gp[i];
      const double m_hat = mp[i] / bc1;
      const double v_hat = vp[i] / bc2;
      tp[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
  }
}

std::string history_to_tsv(const TrainHistory& history, bool include_wall_time) {
  std::string out = include_wall_time ? "epoch\ttrain_loss\tvalid_auc\twall_s\n"
                                      : "epoch\ttrain_loss\tvalid_auc\n";
  char buf[160];
  for (std::size_t e = 0; e < history.epochs.size(); ++e) {
    const auto& s = history.epochs[e];
    if (include_wall_time) {
      std::snprintf(buf, sizeof(buf), "%zu\t%.17g\t%.17g\t%.3f\n", e + 1, s.mean_train_loss,
                    s.valid_auc, s.wall_time_s);
    } else {
      std::snprintf(buf, sizeof(buf), "%zu\t%.17g\t%.17g\n", e + 1, s.mean_train_loss, s.valid_auc);
    }
    out += buf;
  }
  return out;
}

TrainResult train(std::span<const Sequence> train_set, std::span<const Sequence> valid_set,
                  const EncoderConfig& encoder_cfg, const TrainConfig& train_cfg) {
  encoder_cfg.validate();
  train_cfg.validate();
  if (train_set.empty()) throw DataError("train: empty training set");

  long long n_pos = 0, n_neg = 0;
  for (const auto& seq : train_set) (seq.label() == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("train: training set must contain both classes (" + std::to_string(n_pos) +
                    " positive / " + std::to_string(n_neg) + " negative)");
  }
  const double pos_weight = train_cfg.pos_weight_override
                                ? *train_cfg.pos_weight_override
                                : pos_weight_from_counts(n_neg, n_pos);

  const int feature_dim = static_cast<int>(train_set.front().tokens.front().features.size());
  EncoderParams params = EncoderParams::init(encoder_cfg, feature_dim, train_cfg.seed);
  AdamState adam = AdamState::init(params);
  const std::size_t n_params = params.named().size();

  TrainResult result;
  result.pos_weight = pos_weight;
  EncoderParams best = params;
  double best_auc = -1.0;

  std::vector<int> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    Rng shuffle_rng(Rng::mix(Rng::mix(train_cfg.seed, 0x65706f63), static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += train_cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + train_cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - begin);

      // Per-example gradients accumulated in a fixed order so the reduction
      // is deterministic.
      std::vector<Matrix> acc(n_params);
      for (std::size_t b = begin; b < end; ++b) {
        const Sequence& seq = train_set[order[b]];
        Graph g;
        BoundParams bound = bind_params(g, params);
        const Matrix x = features_matrix(seq, feature_dim);
        const std::vector<double> ts = timestamps_of(seq);
        const NodeId logit = build_scoring_graph(g, bound, encoder_cfg, x, ts);
        const NodeId loss = g.weighted_bce(logit, seq.label(), pos_weight);
        loss_sum += g.value(loss)(0, 0);
        const auto grads = g.backward(loss);
        for (std::size_t p = 0; p < n_params; ++p) {
          Matrix gp = g.gradient(grads, bound.order[p]);
          if (acc[p].empty()) {
            acc[p] = std::move(gp);
          } else {
            double* a = acc[p].data().data();
            const double* src = gp.data().data();
            for (std::size_t i = 0; i < acc[p].size(); ++i) a[i] += src[i];
          }
        }
      }
      for (auto& m : acc) {
        for (double& x : m.data()) x *= inv_batch;
      }
      adam_step(params, acc, adam, train_cfg);
    }
    if (!params.all_finite()) {
      throw InternalCheckError("train: parameters became non-finite at epoch " +
                               std::to_string(epoch + 1));
    }

    EpochStats stats;
    stats.mean_train_loss = loss_sum / static_cast<double>(train_set.size());

    if (!valid_set.empty()) {
      ScoredSet scored;
      scored.scores.reserve(valid_set.size());
      scored.labels.reserve(valid_set.size());
      for (const auto& seq : valid_set) {
        const Matrix x = features_matrix(seq, feature_dim);
        const std::vector<double> ts = timestamps_of(seq);
        scored.scores.push_back(encode(encoder_cfg, params, x, ts));
        scored.labels.push_back(seq.label());
      }
      if (scored.positives() > 0 && scored.negatives() > 0) {
        stats.valid_auc = auc_rank(scored);
      }
    }
    stats.wall_time_s = seconds_since(epoch_start);
    result.history.epochs.push_back(stats);

    if (stats.valid_auc > best_auc) {
      best_auc = stats.valid_auc;
      best = params;
      result.best_epoch = epoch;
    }
  }

  result.params = result.best_epoch >= 0 ? std::move(best) : std::move(params);
  return result;
}

EvalReport evaluate(const EncoderConfig& encoder_cfg, const EncoderParams& params,
                    std::span<const Sequence> seqs, std::uint64_t seed,
                    const std::string& config_digest) {
  encoder_cfg.validate();
  if (seqs.empty()) throw DataError("evaluate: empty sequence set");

  const auto start = std::chrono::steady_clock::now();
  ScoredSet scored;
  scored.scores.reserve(seqs.size());
  scored.labels.reserve(seqs.size());
  for (const auto& seq : seqs) {
    const Matrix x = features_matrix(seq, params.feature_dim);
    const std::vector<double> ts = timestamps_of(seq);
    scored.scores.push_back(encode(encoder_cfg, params, x, ts));
    scored.labels.push_back(seq.label());
  }
  if (scored.positives() == 0 || scored.negatives() == 0) {
    throw DataError("evaluate: both classes required to compute AUC");
  }

  EvalReport report;
  report.mode = to_string(encoder_cfg.mode);
  report.seed = seed;
  report.config_digest = config_digest;
  report.n_pos = scored.positives();
  report.n_neg = scored.negatives();
  report.roc = roc_curve(scored);
  report.auc = auc_trapezoid(report.roc);
  const double rank = auc_rank(scored);
  if (std::abs(report.auc - rank) > 1e-9) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "AUC paths disagree: trapezoid %.17g vs rank %.17g", report.auc,
                  rank);
    throw InternalCheckError(buf);
  }
  report.wall_time_s = seconds_since(start);
  return report;
}

SplitIndices resolve_split(const Dataset& ds, double valid_fraction, std::uint64_t seed) {
  SplitIndices out;
  if (ds.has_split()) {
    for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
      (ds.split_tags[i] == 0 ? out.train : out.valid).push_back(static_cast<int>(i));
    }
    return out;
  }
  std::vector<std::string> ids;
  ids.reserve(ds.sequences.size());
  for (const auto& seq : ds.sequences) ids.push_back(seq.entity_id);
  const auto sides = split_sides(ids, valid_fraction, seed);
  for (std::size_t i = 0; i < sides.size(); ++i) {
    (sides[i] == 0 ? out.train : out.valid).push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<Sequence> gather(const Dataset& ds, std::span<const int> indices) {
  std::vector<Sequence> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(ds.sequences[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<CompareResult> compare_models(const Dataset& ds, EncoderConfig encoder_cfg,
                                          const TrainConfig& train_cfg,
                                          const std::string& config_digest) {
  ds.validate();
  const SplitIndices split = resolve_split(ds, train_cfg.valid_fraction, train_cfg.seed);
  if (split.train.empty() || split.valid.empty()) {
    throw DataError("compare: split produced an empty side");
  }
  const std::vector<Sequence> train_set = gather(ds, split.train);
  const std::vector<Sequence> valid_set = gather(ds, split.valid);

  std::vector<CompareResult> results;
  for (PositionMode mode :
       {PositionMode::kSinusoidal, PositionMode::kRope, PositionMode::kRedre}) {
    encoder_cfg.mode = mode;
    TrainResult tr = train(train_set, valid_set, encoder_cfg, train_cfg);
    CompareResult r;
    r.mode = mode;
    r.report = evaluate(encoder_cfg, tr.params, valid_set, train_cfg.seed, config_digest);
    r.params = std::move(tr.params);
    r.history = std::move(tr.history);
    r.pos_weight = tr.pos_weight;
    results.push_back(std::move(r));
  }
  return results;
}

std::string comparison_table(std::span<const CompareResult> results) {
  std::string out = "mode\tvalid_auc\tn_pos\tn_neg\n";
  char buf[128];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof(buf), "%s\t%.6f\t%lld\t%lld\n", to_string(r.mode), r.report.auc,
                  r.report.n_pos, r.report.n_neg);
    out += buf;
  }
  return out;
}

}  // namespace rotascore
