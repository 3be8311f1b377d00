#include "rotascore/graph.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rotascore/loss.hpp"
#include "rotascore/rotary.hpp"

namespace rotascore {

namespace {

// NaN policy: a public op producing non-finite values from finite inputs is a
// defect; checked in debug builds only.
inline void debug_check_finite(const Matrix& m) {
  assert(m.all_finite() && "graph op produced non-finite values");
  (void)m;
}

}  // namespace

NodeId Graph::push(Node n) {
  debug_check_finite(n.value);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Graph::check_id(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw std::invalid_argument("Graph: node id " + std::to_string(id) + " out of range");
  }
}

const Graph::Node& Graph::node(NodeId id) const {
  check_id(id);
  return nodes_[static_cast<std::size_t>(id)];
}

const Matrix& Graph::value(NodeId id) const { return node(id).value; }

NodeId Graph::leaf(Matrix value) {
  return push({OpKind::kLeaf, {}, std::move(value), {}, 0.0, 0, 0});
}

NodeId Graph::constant(Matrix value) {
  return push({OpKind::kConstant, {}, std::move(value), {}, 0.0, 0, 0});
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  Matrix v = rotascore::matmul(value(a), value(b));
  return push({OpKind::kMatmul, {a, b}, std::move(v), {}, 0.0, 0, 0});
}

NodeId Graph::add(NodeId a, NodeId b) {
  Matrix v = rotascore::add(value(a), value(b));
  return push({OpKind::kAdd, {a, b}, std::move(v), {}, 0.0, 0, 0});
}

NodeId Graph::scale(NodeId a, double factor) {
  Matrix v = rotascore::scale(value(a), factor);
  return push({OpKind::kScale, {a}, std::move(v), {}, factor, 0, 0});
}

NodeId Graph::add_row_bias(NodeId a, NodeId bias) {
  const Matrix& x = value(a);
  const Matrix& b = value(bias);
  if (b.rows() != 1 || b.cols() != x.cols()) {
    throw std::invalid_argument("add_row_bias: bias " + b.shape_str() + " does not broadcast over " +
                                x.shape_str());
  }
  Matrix v = x;
  for (int i = 0; i < v.rows(); ++i) {
    auto r = v.row(i);
    for (int j = 0; j < v.cols(); ++j) r[j] += b(0, j);
  }
  return push({OpKind::kAddRowBias, {a, bias}, std::move(v), {}, 0.0, 0, 0});
}

NodeId Graph::relu(NodeId a) {
  Matrix v = value(a);
  for (auto& x : v.data()) x = x > 0.0 ? x : 0.0;
  return push({OpKind::kRelu, {a}, std::move(v), {}, 0.0, 0, 0});
}

NodeId Graph::softmax_rows(NodeId a) {
  Matrix v = rotascore::softmax_rows(value(a));
  return push({OpKind::kSoftmaxRows, {a}, std::move(v), {}, 0.0, 0, 0});
}

NodeId Graph::layer_norm_rows(NodeId x, NodeId gain, NodeId offset) {
  const Matrix& in = value(x);
  const Matrix& g = value(gain);
  const Matrix& b = value(offset);
  if (g.rows() != 1 || g.cols() != in.cols() || b.rows() != 1 || b.cols() != in.cols()) {
    throw std::invalid_argument("layer_norm_rows: gain/offset must be 1x" + std::to_string(in.cols()));
  }
  Matrix v(in.rows(), in.cols());
  const int d = in.cols();
  for (int i = 0; i < in.rows(); ++i) {
    const auto xi = in.row(i);
    auto vi = v.row(i);
    double mean = 0.0;
    for (double t : xi) mean += t;
    mean /= d;
    double var = 0.0;
    for (double t : xi) var += (t - mean) * (t - mean);
    var /= d;
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    for (int j = 0; j < d; ++j) vi[j] = g(0, j) * ((xi[j] - mean) * inv) + b(0, j);
  }
  return push({OpKind::kLayerNormRows, {x, gain, offset}, std::move(v), {}, 0.0, 0, 0});
}

NodeId Graph::rotate_rows(NodeId a, Matrix angles) {
  Matrix v = rotate_rows_pairwise(value(a), angles, /*invert=*/false);
  return push({OpKind::kRotateRows, {a}, std::move(v), std::move(angles), 0.0, 0, 0});
}

NodeId Graph::transpose(NodeId a) {
  Matrix v = rotascore::transpose(value(a));
  return push({OpKind::kTranspose, {a}, std::move(v), {}, 0.0, 0, 0});
}

NodeId Graph::slice_rows(NodeId a, int r0, int r1) {
  const Matrix& x = value(a);
  if (r0 < 0 || r1 > x.rows() || r0 >= r1) {
    throw std::invalid_argument("slice_rows: bad range [" + std::to_string(r0) + ", " +
                                std::to_string(r1) + ") for " + x.shape_str());
  }
  Matrix v(r1 - r0, x.cols());
  for (int i = r0; i < r1; ++i) {
    auto src = x.row(i);
    auto dst = v.row(i - r0);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return push({OpKind::kSliceRows, {a}, std::move(v), {}, 0.0, r0, r1});
}

NodeId Graph::slice_cols(NodeId a, int c0, int c1) {
  const Matrix& x = value(a);
  if (c0 < 0 || c1 > x.cols() || c0 >= c1) {
    throw std::invalid_argument("slice_cols: bad range [" + std::to_string(c0) + ", " +
                                std::to_string(c1) + ") for " + x.shape_str());
  }
  Matrix v(x.rows(), c1 - c0);
  for (int i = 0; i < x.rows(); ++i) {
    for (int j = c0; j < c1; ++j) v(i, j - c0) = x(i, j);
  }
  return push({OpKind::kSliceCols, {a}, std::move(v), {}, 0.0, c0, c1});
}

NodeId Graph::concat_cols(std::span<const NodeId> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const int rows = value(parts[0]).rows();
  int cols = 0;
  for (NodeId p : parts) {
    if (value(p).rows() != rows) {
      throw std::invalid_argument("concat_cols: row mismatch " + value(p).shape_str());
    }
    cols += value(p).cols();
  }
  Matrix v(rows, cols);
  int off = 0;
  for (NodeId p : parts) {
    const Matrix& m = value(p);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < m.cols(); ++j) v(i, off + j) = m(i, j);
    }
    off += m.cols();
  }
  return push({OpKind::kConcatCols, std::vector<NodeId>(parts.begin(), parts.end()), std::move(v),
               {}, 0.0, 0, 0});
}

NodeId Graph::weighted_bce(NodeId logit, int label, double pos_weight) {
  const Matrix& z = value(logit);
  if (z.rows() != 1 || z.cols() != 1) {
    throw std::invalid_argument("weighted_bce: logit must be 1x1, got " + z.shape_str());
  }
  Matrix v(1, 1);
  v(0, 0) = rotascore::weighted_bce(z(0, 0), label, pos_weight);
  return push({OpKind::kWeightedBce, {logit}, std::move(v), {}, pos_weight, label, 0});
}

Matrix Graph::gradient(const std::vector<Matrix>& grads, NodeId id) const {
  check_id(id);
  if (grads.size() != nodes_.size()) {
    throw std::invalid_argument("gradient: stale backward result");
  }
  const Matrix& g = grads[static_cast<std::size_t>(id)];
  if (!g.empty()) return g;
  const Matrix& v = value(id);
  return Matrix::zeros(v.rows(), v.cols());
}

std::vector<Matrix> Graph::backward(NodeId output) const {
  const Matrix& out = value(output);
  if (out.rows() != 1 || out.cols() != 1) {
    throw std::invalid_argument("backward: output must be a 1x1 scalar, got " + out.shape_str());
  }

  // Mark nodes reachable from the output; the sweep below touches each once.
  std::vector<char> needed(nodes_.size(), 0);
  std::vector<NodeId> stack{output};
  needed[static_cast<std::size_t>(output)] = 1;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    for (NodeId in : nodes_[static_cast<std::size_t>(id)].inputs) {
      if (!needed[static_cast<std::size_t>(in)]) {
        needed[static_cast<std::size_t>(in)] = 1;
        stack.push_back(in);
      }
    }
  }

  std::vector<Matrix> grad(nodes_.size());
  grad[static_cast<std::size_t>(output)] = Matrix{1, 1, {1.0}};

  auto accum = [&](NodeId id, const Matrix& g) {
    Matrix& slot = grad[static_cast<std::size_t>(id)];
    if (slot.empty()) {
      slot = g;
    } else {
      for (std::size_t i = 0; i < slot.size(); ++i) slot.data()[i] += g.data()[i];
    }
  };
  auto ensure = [&](NodeId id) -> Matrix& {
    Matrix& slot = grad[static_cast<std::size_t>(id)];
    if (slot.empty()) {
      const Matrix& v = nodes_[static_cast<std::size_t>(id)].value;
      slot = Matrix::zeros(v.rows(), v.cols());
    }
    return slot;
  };

  for (NodeId id = output; id >= 0; --id) {
    if (!needed[static_cast<std::size_t>(id)]) continue;
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const Matrix& g = grad[static_cast<std::size_t>(id)];
    if (g.empty()) continue;  // reachable but no gradient flowed (e.g. behind a constant)

    switch (n.kind) {
      case OpKind::kLeaf:
      case OpKind::kConstant:
        break;
      case OpKind::kMatmul: {
        const Matrix& a = nodes_[n.inputs[0]].value;
        const Matrix& b = nodes_[n.inputs[1]].value;
        accum(n.inputs[0], rotascore::matmul(g, rotascore::transpose(b)));
        accum(n.inputs[1], rotascore::matmul(rotascore::transpose(a), g));
        break;
      }
      case OpKind::kAdd:
        accum(n.inputs[0], g);
        accum(n.inputs[1], g);
        break;
      case OpKind::kScale:
        accum(n.inputs[0], rotascore::scale(g, n.scalar));
        break;
      case OpKind::kAddRowBias: {
        accum(n.inputs[0], g);
        Matrix& gb = ensure(n.inputs[1]);
        for (int i = 0; i < g.rows(); ++i) {
          for (int j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
        }
        break;
      }
      case OpKind::kRelu: {
        const Matrix& x = nodes_[n.inputs[0]].value;
        Matrix gx = g;
        for (std::size_t i = 0; i < gx.size(); ++i) {
          if (x.data()[i] <= 0.0) gx.data()[i] = 0.0;
        }
        accum(n.inputs[0], gx);
        break;
      }
      case OpKind::kSoftmaxRows: {
        const Matrix& s = n.value;
        Matrix gx(s.rows(), s.cols());
        for (int i = 0; i < s.rows(); ++i) {
          double dot = 0.0;
          for (int j = 0; j < s.cols(); ++j) dot += g(i, j) * s(i, j);
          for (int j = 0; j < s.cols(); ++j) gx(i, j) = s(i, j) * (g(i, j) - dot);
        }
        accum(n.inputs[0], gx);
        break;
      }
      case OpKind::kLayerNormRows: {
        const Matrix& x = nodes_[n.inputs[0]].value;
        const Matrix& gain = nodes_[n.inputs[1]].value;
        const int d = x.cols();
        Matrix gx(x.rows(), d);
        Matrix ggain = Matrix::zeros(1, d);
        Matrix goff = Matrix::zeros(1, d);
        for (int i = 0; i < x.rows(); ++i) {
          const auto xi = x.row(i);
          double mean = 0.0;
          for (double t : xi) mean += t;
          mean /= d;
          double var = 0.0;
          for (double t : xi) var += (t - mean) * (t - mean);
          var /= d;
          const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
          // xhat = (x - mean) * inv; dxhat = g * gain
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (int j = 0; j < d; ++j) {
            const double xhat = (xi[j] - mean) * inv;
            const double dxhat = g(i, j) * gain(0, j);
            mean_dxhat += dxhat;
            mean_dxhat_xhat += dxhat * xhat;
            ggain(0, j) += g(i, j) * xhat;
            goff(0, j) += g(i, j);
          }
          mean_dxhat /= d;
          mean_dxhat_xhat /= d;
          for (int j = 0; j < d; ++j) {
            const double xhat = (xi[j] - mean) * inv;
            const double dxhat = g(i, j) * gain(0, j);
            gx(i, j) = inv * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat);
          }
        }
        accum(n.inputs[0], gx);
        accum(n.inputs[1], ggain);
        accum(n.inputs[2], goff);
        break;
      }
      case OpKind::kRotateRows:
        // Rotation is orthogonal and linear: pull the gradient back by R(-theta).
        accum(n.inputs[0], rotate_rows_pairwise(g, n.payload, /*invert=*/true));
        break;
      case OpKind::kTranspose:
        accum(n.inputs[0], rotascore::transpose(g));
        break;
      case OpKind::kSliceRows: {
        Matrix& gx = ensure(n.inputs[0]);
        for (int i = n.i0; i < n.i1; ++i) {
          for (int j = 0; j < g.cols(); ++j) gx(i, j) += g(i - n.i0, j);
        }
        break;
      }
      case OpKind::kSliceCols: {
        Matrix& gx = ensure(n.inputs[0]);
        for (int i = 0; i < g.rows(); ++i) {
          for (int j = n.i0; j < n.i1; ++j) gx(i, j) += g(i, j - n.i0);
        }
        break;
      }
      case OpKind::kConcatCols: {
        int off = 0;
        for (NodeId p : n.inputs) {
          const Matrix& part = nodes_[static_cast<std::size_t>(p)].value;
          Matrix gp(part.rows(), part.cols());
          for (int i = 0; i < part.rows(); ++i) {
            for (int j = 0; j < part.cols(); ++j) gp(i, j) = g(i, off + j);
          }
          accum(p, gp);
          off += part.cols();
        }
        break;
      }
      case OpKind::kWeightedBce: {
        const double z = nodes_[n.inputs[0]].value(0, 0);
        Matrix gz(1, 1);
        gz(0, 0) = g(0, 0) * weighted_bce_grad(z, n.i0, n.scalar);
        accum(n.inputs[0], gz);
        break;
      }
    }
  }
  return grad;
}

}  // namespace rotascore
