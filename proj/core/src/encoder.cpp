#include "rotascore/encoder.hpp"

#include <cmath>
#include <stdexcept>

#include "rotascore/rng.hpp"

namespace rotascore {

namespace {

// Finite stand-in for -inf in masked attention logits; exp() underflows to an
// exact 0 weight after max-subtraction.
constexpr double kMaskedLogit = -1e30;

Matrix normal_matrix(int rows, int cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (auto& x : m.data()) x = stddev * rng.normal();
  return m;
}

}  // namespace

const char* to_string(PositionMode mode) {
  switch (mode) {
    case PositionMode::kNone: return "none";
    case PositionMode::kSinusoidal: return "sinusoidal";
    case PositionMode::kRope: return "rope";
    case PositionMode::kRedre: return "redre";
  }
  return "?";
}

std::optional<PositionMode> parse_position_mode(const std::string& s) {
  if (s == "none") return PositionMode::kNone;
  if (s == "sinusoidal") return PositionMode::kSinusoidal;
  if (s == "rope") return PositionMode::kRope;
  if (s == "redre") return PositionMode::kRedre;
  return std::nullopt;
}

void EncoderConfig::validate() const {
  if (model_dim < 2) throw std::invalid_argument("EncoderConfig: model_dim must be >= 2");
  if (heads < 1 || model_dim % heads != 0) {
    throw std::invalid_argument("EncoderConfig: heads must divide model_dim");
  }
  if (head_dim() % 2 != 0) {
    throw std::invalid_argument("EncoderConfig: head_dim (model_dim / heads) must be even, got " +
                                std::to_string(head_dim()));
  }
  if (layers < 1) throw std::invalid_argument("EncoderConfig: layers must be >= 1");
  if (ff_dim < 1) throw std::invalid_argument("EncoderConfig: ff_dim must be >= 1");
  if (max_seq_len < 1) throw std::invalid_argument("EncoderConfig: max_seq_len must be >= 1");
  if (mode == PositionMode::kRedre && !(time_scale > 0.0)) {
    throw std::invalid_argument("EncoderConfig: time_scale must be > 0 in redre mode");
  }
  if (!(rope_base > 1.0)) throw std::invalid_argument("EncoderConfig: rope_base must be > 1");
}

EncoderParams EncoderParams::init(const EncoderConfig& cfg, int feature_dim, std::uint64_t seed) {
  cfg.validate();
  if (feature_dim < 1) throw std::invalid_argument("EncoderParams: feature_dim must be >= 1");
  Rng rng(Rng::mix(seed, 0x70617261));  // params stream

  const int d = cfg.model_dim;
  EncoderParams p;
  p.feature_dim = feature_dim;
  p.input_w = normal_matrix(feature_dim, d, 1.0 / std::sqrt(feature_dim), rng);
  p.input_b = Matrix::zeros(1, d);
  p.layers.resize(cfg.layers);
  for (auto& l : p.layers) {
    const double s = 1.0 / std::sqrt(d);
    l.wq = normal_matrix(d, d, s, rng);
    l.bq = Matrix::zeros(1, d);
    l.wk = normal_matrix(d, d, s, rng);
    l.wv = normal_matrix(d, d, s, rng);
    l.bv = Matrix::zeros(1, d);
    l.wo = normal_matrix(d, d, s, rng);
    l.bo = Matrix::zeros(1, d);
    l.ln1_gain = Matrix::full(1, d, 1.0);
    l.ln1_offset = Matrix::zeros(1, d);
    l.ln2_gain = Matrix::full(1, d, 1.0);
    l.ln2_offset = Matrix::zeros(1, d);
    l.ff_w1 = normal_matrix(d, cfg.ff_dim, s, rng);
    l.ff_b1 = Matrix::zeros(1, cfg.ff_dim);
    l.ff_w2 = normal_matrix(cfg.ff_dim, d, 1.0 / std::sqrt(cfg.ff_dim), rng);
    l.ff_b2 = Matrix::zeros(1, d);
  }
  p.final_gain = Matrix::full(1, d, 1.0);
  p.final_offset = Matrix::zeros(1, d);
  p.cls_w = normal_matrix(d, 1, 1.0 / std::sqrt(d), rng);
  p.cls_b = Matrix::zeros(1, 1);
  return p;
}

namespace {

template <class Self, class MatPtr>
std::vector<std::pair<std::string, MatPtr>> named_impl(Self& p) {
  std::vector<std::pair<std::string, MatPtr>> out;
  out.reserve(6 + p.layers.size() * 15);
  out.emplace_back("input.w", &p.input_w);
  out.emplace_back("input.b", &p.input_b);
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    auto& l = p.layers[i];
    const std::string pre = "layer" + std::to_string(i) + ".";
    out.emplace_back(pre + "attn.wq", &l.wq);
    out.emplace_back(pre + "attn.bq", &l.bq);
    out.emplace_back(pre + "attn.wk", &l.wk);
    out.emplace_back(pre + "attn.wv", &l.wv);
    out.emplace_back(pre + "attn.bv", &l.bv);
    out.emplace_back(pre + "attn.wo", &l.wo);
    out.emplace_back(pre + "attn.bo", &l.bo);
    out.emplace_back(pre + "ln1.gain", &l.ln1_gain);
    out.emplace_back(pre + "ln1.offset", &l.ln1_offset);
    out.emplace_back(pre + "ln2.gain", &l.ln2_gain);
    out.emplace_back(pre + "ln2.offset", &l.ln2_offset);
    out.emplace_back(pre + "ff.w1", &l.ff_w1);
    out.emplace_back(pre + "ff.b1", &l.ff_b1);
    out.emplace_back(pre + "ff.w2", &l.ff_w2);
    out.emplace_back(pre + "ff.b2", &l.ff_b2);
  }
  out.emplace_back("final.gain", &p.final_gain);
  out.emplace_back("final.offset", &p.final_offset);
  out.emplace_back("cls.w", &p.cls_w);
  out.emplace_back("cls.b", &p.cls_b);
  return out;
}

}  // namespace

std::vector<std::pair<std::string, Matrix*>> EncoderParams::named() {
  return named_impl<EncoderParams, Matrix*>(*this);
}

std::vector<std::pair<std::string, const Matrix*>> EncoderParams::named() const {
  return named_impl<const EncoderParams, const Matrix*>(*this);
}

std::size_t EncoderParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : named()) n += m->size();
  return n;
}

bool EncoderParams::all_finite() const {
  for (const auto& [name, m] : named()) {
    if (!m->all_finite()) return false;
  }
  return true;
}

BoundParams bind_params(Graph& g, const EncoderParams& params) {
  BoundParams b;
  b.layers.resize(params.layers.size());
  // Bind strictly in named() order so b.order lines up with it.
  auto bind = [&](const Matrix& m) {
    const NodeId id = g.leaf(m);
    b.order.push_back(id);
    return id;
  };
  b.input_w = bind(params.input_w);
  b.input_b = bind(params.input_b);
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const LayerParams& l = params.layers[i];
    BoundLayer& bl = b.layers[i];
    bl.wq = bind(l.wq);
    bl.bq = bind(l.bq);
    bl.wk = bind(l.wk);
    bl.wv = bind(l.wv);
    bl.bv = bind(l.bv);
    bl.wo = bind(l.wo);
    bl.bo = bind(l.bo);
    bl.ln1_gain = bind(l.ln1_gain);
    bl.ln1_offset = bind(l.ln1_offset);
    bl.ln2_gain = bind(l.ln2_gain);
    bl.ln2_offset = bind(l.ln2_offset);
    bl.ff_w1 = bind(l.ff_w1);
    bl.ff_b1 = bind(l.ff_b1);
    bl.ff_w2 = bind(l.ff_w2);
    bl.ff_b2 = bind(l.ff_b2);
  }
  b.final_gain = bind(params.final_gain);
  b.final_offset = bind(params.final_offset);
  b.cls_w = bind(params.cls_w);
  b.cls_b = bind(params.cls_b);
  return b;
}

Matrix position_angle_rows(PositionMode mode, const FrequencySchedule& sched, int n,
                           std::span<const double> timestamps, double tau,
                           std::span<const long long> positions) {
  if (mode == PositionMode::kNone || mode == PositionMode::kSinusoidal) return {};
  const int half = static_cast<int>(sched.omegas.size());
  Matrix angles(n, half);
  if (mode == PositionMode::kRope) {
    for (int i = 0; i < n; ++i) {
      const long long pos = positions.empty() ? i : positions[i];
      const auto thetas = rope_angles(pos, sched);
      std::copy(thetas.begin(), thetas.end(), angles.row(i).begin());
    }
    return angles;
  }
  // kRedre: rotate each token by its own offset from the sequence start; the
  // q.k product then depends only on pairwise time differences.
  if (timestamps.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("position_angle_rows: redre mode needs one timestamp per token");
  }
  for (int i = 0; i < n; ++i) {
    const auto thetas = redre_angles(timestamps[i] - timestamps[0], sched, tau);
    std::copy(thetas.begin(), thetas.end(), angles.row(i).begin());
  }
  return angles;
}

Matrix sinusoidal_table(int n, int model_dim, double base) {
  Matrix pe(n, model_dim);
  for (int pos = 0; pos < n; ++pos) {
    for (int k = 0; 2 * k < model_dim; ++k) {
      const double freq = std::pow(base, -2.0 * k / model_dim);
      pe(pos, 2 * k) = std::sin(pos * freq);
      if (2 * k + 1 < model_dim) pe(pos, 2 * k + 1) = std::cos(pos * freq);
    }
  }
  return pe;
}

NodeId build_scoring_graph(Graph& g, const BoundParams& bound, const EncoderConfig& cfg,
                           const Matrix& features, std::span<const double> timestamps,
                           AttentionTrace* trace, std::span<const long long> positions) {
  const int n = features.rows();
  const int hd = cfg.head_dim();
  const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(hd));

  if (n < 1) throw std::invalid_argument("build_scoring_graph: empty sequence");
  if (n > cfg.max_seq_len) {
    throw std::invalid_argument("build_scoring_graph: sequence length " + std::to_string(n) +
                                " exceeds max_seq_len " + std::to_string(cfg.max_seq_len));
  }
  if (!features.all_finite()) throw std::invalid_argument("build_scoring_graph: non-finite features");
  if (cfg.mode == PositionMode::kRedre) {
    if (timestamps.size() != static_cast<std::size_t>(n)) {
      throw std::invalid_argument("build_scoring_graph: redre mode requires timestamps");
    }
    for (int i = 1; i < n; ++i) {
      if (timestamps[i] < timestamps[i - 1]) {
        throw std::invalid_argument("build_scoring_graph: timestamps must be nondecreasing");
      }
    }
  }

  const FrequencySchedule sched = frequency_schedule(hd, cfg.rope_base);
  const Matrix angles =
      position_angle_rows(cfg.mode, sched, n, timestamps, cfg.time_scale, positions);

  if (trace) {
    trace->layers = cfg.layers;
    trace->heads = cfg.heads;
    trace->weights.clear();
    trace->weights.reserve(static_cast<std::size_t>(cfg.layers) * cfg.heads);
  }

  // Causal mask: row m may attend to columns n <= m.
  Matrix mask(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) mask(i, j) = kMaskedLogit;
  }
  const NodeId mask_id = g.constant(std::move(mask));

  NodeId x = g.add_row_bias(g.matmul(g.constant(features), bound.input_w), bound.input_b);
  if (cfg.mode == PositionMode::kSinusoidal) {
    x = g.add(x, g.constant(sinusoidal_table(n, cfg.model_dim, cfg.rope_base)));
  }

  for (int layer = 0; layer < cfg.layers; ++layer) {
    const BoundLayer& l = bound.layers[layer];

    // Attention block, pre-norm.
    const NodeId ln1 = g.layer_norm_rows(x, l.ln1_gain, l.ln1_offset);
    const NodeId q = g.add_row_bias(g.matmul(ln1, l.wq), l.bq);
    const NodeId k = g.matmul(ln1, l.wk);
    const NodeId v = g.add_row_bias(g.matmul(ln1, l.wv), l.bv);

    std::vector<NodeId> head_outs;
    head_outs.reserve(cfg.heads);
    for (int h = 0; h < cfg.heads; ++h) {
      NodeId qh = g.slice_cols(q, h * hd, (h + 1) * hd);
      NodeId kh = g.slice_cols(k, h * hd, (h + 1) * hd);
      const NodeId vh = g.slice_cols(v, h * hd, (h + 1) * hd);
      if (!angles.empty()) {
        qh = g.rotate_rows(qh, angles);
        kh = g.rotate_rows(kh, angles);
      }
      const NodeId scores =
          g.add(g.scale(g.matmul(qh, g.transpose(kh)), inv_sqrt_hd), mask_id);
      const NodeId attn = g.softmax_rows(scores);
      if (trace) trace->weights.push_back(g.value(attn));
      head_outs.push_back(g.matmul(attn, vh));
    }
    const NodeId merged = g.concat_cols(head_outs);
    const NodeId attn_out = g.add_row_bias(g.matmul(merged, l.wo), l.bo);
    x = g.add(x, attn_out);

    // Feed-forward block, pre-norm, plain ReLU.
    const NodeId ln2 = g.layer_norm_rows(x, l.ln2_gain, l.ln2_offset);
    const NodeId h1 = g.relu(g.add_row_bias(g.matmul(ln2, l.ff_w1), l.ff_b1));
    const NodeId ff_out = g.add_row_bias(g.matmul(h1, l.ff_w2), l.ff_b2);
    x = g.add(x, ff_out);
  }

  const NodeId normed = g.layer_norm_rows(x, bound.final_gain, bound.final_offset);
  const NodeId last = g.slice_rows(normed, n - 1, n);
  return g.add(g.matmul(last, bound.cls_w), bound.cls_b);
}

double encode(const EncoderConfig& cfg, const EncoderParams& params, const Matrix& features,
              std::span<const double> timestamps, AttentionTrace* trace,
              std::span<const long long> positions) {
  cfg.validate();
  if (features.cols() != params.feature_dim) {
    throw std::invalid_argument("encode: feature dim " + std::to_string(features.cols()) +
                                " does not match params (" + std::to_string(params.feature_dim) + ")");
  }
  Graph g;
  const BoundParams bound = bind_params(g, params);
  const NodeId logit = build_scoring_graph(g, bound, cfg, features, timestamps, trace, positions);
  return g.value(logit)(0, 0);
}

}  // namespace rotascore
