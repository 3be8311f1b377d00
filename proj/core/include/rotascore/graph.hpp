#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rotascore/matrix.hpp"

namespace rotascore {

using NodeId = std::int32_t;

inline constexpr double kLayerNormEps = 1e-5;

enum class OpKind : std::uint8_t {
  kLeaf,          // trainable parameter
  kConstant,      // data, masks, positional tables; no gradient
  kMatmul,
  kAdd,
  kScale,         // multiply by fixed scalar
  kAddRowBias,    // N x D plus broadcast 1 x D bias
  kRelu,
  kSoftmaxRows,
  kLayerNormRows, // inputs: x, gain (1 x D), offset (1 x D)
  kRotateRows,    // pairwise rotation, per-row angle payload
  kTranspose,
  kSliceRows,
  kSliceCols,
  kConcatCols,
  kWeightedBce,   // scalar loss from a 1 x 1 logit
};

/// Append-only tape of eagerly evaluated operations. Inputs of a node always
/// precede it, so the tape is acyclic by construction and a reverse id sweep
/// is a valid reverse topological order. A Graph must stay on one thread;
/// distinct graphs are independent.
class Graph {
public:
  NodeId leaf(Matrix value);
  NodeId constant(Matrix value);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId add_row_bias(NodeId a, NodeId bias);
  NodeId relu(NodeId a);
  NodeId softmax_rows(NodeId a);
  NodeId layer_norm_rows(NodeId x, NodeId gain, NodeId offset);
  NodeId rotate_rows(NodeId a, Matrix angles);
  NodeId transpose(NodeId a);
  NodeId slice_rows(NodeId a, int r0, int r1);
  NodeId slice_cols(NodeId a, int c0, int c1);
  NodeId concat_cols(std::span<const NodeId> parts);
  NodeId weighted_bce(NodeId logit, int label, double pos_weight);

  const Matrix& value(NodeId id) const;
  std::size_t node_count() const { return nodes_.size(); }

  /// Reverse-mode gradients seeded at `output`, which must be 1x1. Returns one
  /// gradient slot per node; nodes not reachable from the output are left
  /// empty (meaning zero). Pure: repeated calls give identical results.
  std::vector<Matrix> backward(NodeId output) const;

  /// Gradient of `id` from a backward() result, densified to the value shape.
  Matrix gradient(const std::vector<Matrix>& grads, NodeId id) const;

private:
  struct Node {
    OpKind kind;
    std::vector<NodeId> inputs;
    Matrix value;
    Matrix payload;      // kRotateRows: per-row angles
    double scalar = 0.0; // kScale factor, kWeightedBce pos_weight
    int i0 = 0, i1 = 0;  // slice bounds; kWeightedBce label in i0
  };

  NodeId push(Node n);
  const Node& node(NodeId id) const;
  void check_id(NodeId id) const;

  std::vector<Node> nodes_;
};

}  // namespace rotascore
