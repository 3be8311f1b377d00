#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rotascore/graph.hpp"
#include "rotascore/matrix.hpp"
#include "rotascore/rotary.hpp"

namespace rotascore {

enum class PositionMode : std::uint8_t { kNone = 0, kSinusoidal = 1, kRope = 2, kRedre = 3 };

const char* to_string(PositionMode mode);
std::optional<PositionMode> parse_position_mode(const std::string& s);

struct EncoderConfig {
  int model_dim = 32;
  int heads = 4;
  int layers = 2;
  int ff_dim = 64;
  int max_seq_len = 32;
  PositionMode mode = PositionMode::kSinusoidal;
  double time_scale = 3600.0;  // tau: seconds mapped to one radian on the fastest pair
  double rope_base = 10000.0;  // geometric base for the frequency schedule

  int head_dim() const { return model_dim / heads; }
  void validate() const;  // throws std::invalid_argument
};

// The key projection carries no bias: adding one shifts every attention
// logit in a row by the same constant, which softmax cancels, so the
// parameter could never influence the output (absent rotation).
struct LayerParams {
  Matrix wq, bq, wk, wv, bv, wo, bo;
  Matrix ln1_gain, ln1_offset, ln2_gain, ln2_offset;
  Matrix ff_w1, ff_b1, ff_w2, ff_b2;
};

/// All trainable weights. named() fixes the canonical parameter order used by
/// the optimizer, checkpoints and gradient checks.
struct EncoderParams {
  int feature_dim = 0;
  Matrix input_w, input_b;
  std::vector<LayerParams> layers;
  Matrix final_gain, final_offset;
  Matrix cls_w, cls_b;

  static EncoderParams init(const EncoderConfig& cfg, int feature_dim, std::uint64_t seed);

  std::vector<std::pair<std::string, Matrix*>> named();
  std::vector<std::pair<std::string, const Matrix*>> named() const;
  std::size_t scalar_count() const;
  bool all_finite() const;
};

/// Optional capture of the post-softmax attention weights, layer-major then
/// head-major. Each row sums to 1 over unmasked entries.
struct AttentionTrace {
  int layers = 0;
  int heads = 0;
  std::vector<Matrix> weights;
  const Matrix& at(int layer, int head) const { return weights[layer * heads + head]; }
};

/// Tape node ids of all parameter leaves bound into one graph, in named() order.
struct BoundLayer {
  NodeId wq, bq, wk, wv, bv, wo, bo;
  NodeId ln1_gain, ln1_offset, ln2_gain, ln2_offset;
  NodeId ff_w1, ff_b1, ff_w2, ff_b2;
};
struct BoundParams {
  NodeId input_w, input_b;
  std::vector<BoundLayer> layers;
  NodeId final_gain, final_offset;
  NodeId cls_w, cls_b;
  std::vector<NodeId> order;  // aligned with EncoderParams::named()
};

BoundParams bind_params(Graph& g, const EncoderParams& params);

/// Per-row rotation angles (N x head_dim/2) for the given mode; kNone and
/// kSinusoidal need no rotation and return an empty matrix. ROPE uses the row
/// index (or `positions` when supplied); REDRE uses (t_i - t_0) / tau.
Matrix position_angle_rows(PositionMode mode, const FrequencySchedule& sched, int n,
                           std::span<const double> timestamps, double tau,
                           std::span<const long long> positions = {});

/// Additive sinusoidal position table (N x model_dim).
Matrix sinusoidal_table(int n, int model_dim, double base);

/// Builds the full scoring graph on `g`: input projection (plus sinusoidal
/// table in that mode), `layers` pre-norm attention + feed-forward blocks with
/// causal masking, final norm, last-token readout. Returns the 1x1 logit node.
NodeId build_scoring_graph(Graph& g, const BoundParams& bound, const EncoderConfig& cfg,
                           const Matrix& features, std::span<const double> timestamps,
                           AttentionTrace* trace = nullptr,
                           std::span<const long long> positions = {});

/// Forward-only convenience: one sequence in, one fraud logit out.
double encode(const EncoderConfig& cfg, const EncoderParams& params, const Matrix& features,
              std::span<const double> timestamps, AttentionTrace* trace = nullptr,
              std::span<const long long> positions = {});

}  // namespace rotascore
