#include "vitalcast/core/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "vitalcast/error.hpp"

namespace vitalcast::ops {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

ConstMatrixMap as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMatrixMap(t.data().data(), static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(cols));
}

MatrixMap as_matrix(Tensor& t, std::size_t rows, std::size_t cols) {
  return MatrixMap(t.data().data(), static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(cols));
}

// Parent `i` of `node` if it takes a gradient, else nullptr.
GraphNode* grad_target(GraphNode& node, std::size_t i) {
  GraphNode* p = node.parents[i].get();
  return p->requires_grad ? p : nullptr;
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
}

void require_matrix(const Var& a, const char* op) {
  if (a.value().rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " +
                         shape_to_string(a.shape()));
  }
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Rows x cols view of an arbitrary-rank tensor over its last axis.
struct RowView {
  std::size_t rows;
  std::size_t cols;
};

RowView row_view(const Tensor& t) { return {t.rows(), t.cols()}; }

Shape with_last(Shape shape, std::size_t last) {
  shape.back() = last;
  return shape;
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return make_node(std::move(out), {a, b}, [](GraphNode& n) {
    for (std::size_t i = 0; i < 2; ++i) {
      if (auto* p = grad_target(n, i)) p->accumulate(n.grad);
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return make_node(std::move(out), {a, b}, [](GraphNode& n) {
    if (auto* p = grad_target(n, 0)) p->accumulate(n.grad);
    if (auto* p = grad_target(n, 1)) {
      auto& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return make_node(std::move(out), {a, b}, [](GraphNode& n) {
    const Tensor& av = n.parents[0]->value;
    const Tensor& bv = n.parents[1]->value;
    if (auto* p = grad_target(n, 0)) {
      auto& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * bv[i];
    }
    if (auto* p = grad_target(n, 1)) {
      auto& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * av[i];
    }
  });
}

Var scale(const Var& a, double factor) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v *= factor;
  return make_node(std::move(out), {a}, [factor](GraphNode& n) {
    auto& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * n.grad[i];
  });
}

Var square(const Var& a) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v *= v;
  return make_node(std::move(out), {a}, [](GraphNode& n) {
    const Tensor& x = n.parents[0]->value;
    auto& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * x[i] * n.grad[i];
  });
}

Var add_row(const Var& x, const Var& bias) {
  const auto [rows, cols] = row_view(x.value());
  if (bias.value().size() != cols) {
    throw DimensionError("add_row: bias " + shape_to_string(bias.shape()) +
                         " does not match columns of " + shape_to_string(x.shape()));
  }
  Tensor out = x.value();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += bias.value()[c];
  }
  return make_node(std::move(out), {x, bias}, [rows, cols](GraphNode& n) {
    if (auto* p = grad_target(n, 0)) p->accumulate(n.grad);
    if (auto* p = grad_target(n, 1)) {
      auto& g = p->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) g[c] += n.grad[r * cols + c];
      }
    }
  });
}

Var mul_col(const Var& x, const Var& w) {
  const auto [rows, cols] = row_view(x.value());
  if (w.value().size() != rows) {
    throw DimensionError("mul_col: weights " + shape_to_string(w.shape()) +
                         " do not match rows of " + shape_to_string(x.shape()));
  }
  Tensor out = x.value();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] *= w.value()[r];
  }
  return make_node(std::move(out), {x, w}, [rows, cols](GraphNode& n) {
    const Tensor& xv = n.parents[0]->value;
    const Tensor& wv = n.parents[1]->value;
    if (auto* p = grad_target(n, 0)) {
      auto& g = p->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += n.grad[r * cols + c] * wv[r];
      }
    }
    if (auto* p = grad_target(n, 1)) {
      auto& g = p->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += n.grad[r * cols + c] * xv[r * cols + c];
        g[r] += acc;
      }
    }
  });
}

Var matmul(const Var& a, const Var& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t n = a.shape()[0], k = a.shape()[1], m = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul: inner dimensions differ, " +
                         shape_to_string(a.shape()) + " x " + shape_to_string(b.shape()));
  }
  Tensor out({n, m});
  as_matrix(out, n, m).noalias() = as_matrix(a.value(), n, k) * as_matrix(b.value(), k, m);
  return make_node(std::move(out), {a, b}, [n, k, m](GraphNode& node) {
    const auto g = as_matrix(std::as_const(node.grad), n, m);
    if (auto* p = grad_target(node, 0)) {
      as_matrix(p->grad_buffer(), n, k).noalias() +=
          g * as_matrix(node.parents[1]->value, k, m).transpose();
    }
    if (auto* p = grad_target(node, 1)) {
      as_matrix(p->grad_buffer(), k, m).noalias() +=
          as_matrix(node.parents[0]->value, n, k).transpose() * g;
    }
  });
}

Var transpose(const Var& a) {
  require_matrix(a, "transpose");
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  Tensor out({c, r});
  as_matrix(out, c, r) = as_matrix(a.value(), r, c).transpose();
  return make_node(std::move(out), {a}, [r, c](GraphNode& n) {
    as_matrix(n.parents[0]->grad_buffer(), r, c) +=
        as_matrix(std::as_const(n.grad), c, r).transpose();
  });
}

Var linear(const Var& input, const Var& weights, const Var& bias) {
  require_matrix(input, "linear");
  require_matrix(weights, "linear");
  if (input.shape()[1] != weights.shape()[0] || bias.value().size() != weights.shape()[1]) {
    throw DimensionError("linear: input " + shape_to_string(input.shape()) +
                         " incompatible with weights " + shape_to_string(weights.shape()) +
                         " and bias " + shape_to_string(bias.shape()));
  }
  return add_row(matmul(input, weights), bias);
}

Var linear(const Var& input, const Var& weights) {
  require_matrix(input, "linear");
  require_matrix(weights, "linear");
  if (input.shape()[1] != weights.shape()[0]) {
    throw DimensionError("linear: input " + shape_to_string(input.shape()) +
                         " incompatible with weights " + shape_to_string(weights.shape()));
  }
  return matmul(input, weights);
}

Var activation(const Var& input, Activation kind) {
  Tensor out = input.value();
  for (auto& v : out.storage()) {
    switch (kind) {
      case Activation::kRelu: v = v > 0.0 ? v : 0.0; break;
      case Activation::kElu: v = v >= 0.0 ? v : std::expm1(v); break;
      case Activation::kSigmoid: v = stable_sigmoid(v); break;
      case Activation::kTanh: v = std::tanh(v); break;
    }
  }
  return make_node(std::move(out), {input}, [kind](GraphNode& n) {
    const Tensor& x = n.parents[0]->value;
    const Tensor& y = n.value;
    auto& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      double d = 0.0;
      switch (kind) {
        case Activation::kRelu: d = x[i] > 0.0 ? 1.0 : 0.0; break;
        case Activation::kElu: d = x[i] >= 0.0 ? 1.0 : y[i] + 1.0; break;
        case Activation::kSigmoid: d = y[i] * (1.0 - y[i]); break;
        case Activation::kTanh: d = 1.0 - y[i] * y[i]; break;
      }
      g[i] += d * n.grad[i];
    }
  });
}

Var glu(const Var& input) {
  const auto [rows, cols] = row_view(input.value());
  if (cols % 2 != 0) {
    throw DimensionError("glu: last dimension must be even, got " +
                         shape_to_string(input.shape()));
  }
  const std::size_t half = cols / 2;
  Tensor out(with_last(input.shape(), half));
  Tensor gate(out.shape());
  const Tensor& x = input.value();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < half; ++c) {
      const double s = stable_sigmoid(x[r * cols + half + c]);
      gate[r * half + c] = s;
      out[r * half + c] = x[r * cols + c] * s;
    }
  }
  return make_node(std::move(out), {input},
                   [rows, cols, half, gate = std::move(gate)](GraphNode& n) {
                     const Tensor& xv = n.parents[0]->value;
                     auto& g = n.parents[0]->grad_buffer();
                     for (std::size_t r = 0; r < rows; ++r) {
                       for (std::size_t c = 0; c < half; ++c) {
                         const double s = gate[r * half + c];
                         const double up = n.grad[r * half + c];
                         g[r * cols + c] += up * s;
                         g[r * cols + half + c] += up * xv[r * cols + c] * s * (1.0 - s);
                       }
                     }
                   });
}

Var layer_norm(const Var& input, const Var& gain, const Var& shift) {
  const auto [rows, cols] = row_view(input.value());
  if (gain.value().size() != cols || shift.value().size() != cols) {
    throw DimensionError("layer_norm: gain/shift must have " + std::to_string(cols) +
                         " entries");
  }
  const Tensor& x = input.value();
  Tensor normalized(input.shape());
  std::vector<double> inv_std(rows);
  Tensor out(input.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    double mu = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mu += x[r * cols + c];
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = x[r * cols + c] - mu;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    for (std::size_t c = 0; c < cols; ++c) {
      const double xh = (x[r * cols + c] - mu) * inv_std[r];
      normalized[r * cols + c] = xh;
      out[r * cols + c] = xh * gain.value()[c] + shift.value()[c];
    }
  }
  return make_node(
      std::move(out), {input, gain, shift},
      [rows, cols, normalized = std::move(normalized),
       inv_std = std::move(inv_std)](GraphNode& n) {
        const Tensor& gv = n.parents[1]->value;
        if (auto* p = grad_target(n, 0)) {
          auto& g = p->grad_buffer();
          const double inv_cols = 1.0 / static_cast<double>(cols);
          for (std::size_t r = 0; r < rows; ++r) {
            double mean_dxh = 0.0, mean_dxh_xh = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
              const double dxh = n.grad[r * cols + c] * gv[c];
              mean_dxh += dxh;
              mean_dxh_xh += dxh * normalized[r * cols + c];
            }
            mean_dxh *= inv_cols;
            mean_dxh_xh *= inv_cols;
            for (std::size_t c = 0; c < cols; ++c) {
              const double dxh = n.grad[r * cols + c] * gv[c];
              g[r * cols + c] +=
                  inv_std[r] * (dxh - mean_dxh - normalized[r * cols + c] * mean_dxh_xh);
            }
          }
        }
        if (auto* p = grad_target(n, 1)) {
          auto& g = p->grad_buffer();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
              g[c] += n.grad[r * cols + c] * normalized[r * cols + c];
            }
          }
        }
        if (auto* p = grad_target(n, 2)) {
          auto& g = p->grad_buffer();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) g[c] += n.grad[r * cols + c];
          }
        }
      });
}

namespace {

// Softmax over columns [0, visible) of each row; remaining columns are zero.
Var masked_softmax(const Var& input, std::size_t offset, bool causal) {
  const auto [rows, cols] = row_view(input.value());
  const Tensor& x = input.value();
  Tensor out(input.shape(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t visible = causal ? std::min(cols, offset + r + 1) : cols;
    double mx = x[r * cols];
    for (std::size_t c = 1; c < visible; ++c) mx = std::max(mx, x[r * cols + c]);
    double z = 0.0;
    for (std::size_t c = 0; c < visible; ++c) {
      const double e = std::exp(x[r * cols + c] - mx);
      out[r * cols + c] = e;
      z += e;
    }
    for (std::size_t c = 0; c < visible; ++c) out[r * cols + c] /= z;
  }
  return make_node(std::move(out), {input}, [rows, cols](GraphNode& n) {
    const Tensor& y = n.value;
    auto& g = n.parents[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += n.grad[r * cols + c] * y[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) {
        g[r * cols + c] += y[r * cols + c] * (n.grad[r * cols + c] - dot);
      }
    }
  });
}

}  // namespace

Var softmax(const Var& input) { return masked_softmax(input, 0, false); }

Var causal_softmax(const Var& scores, std::size_t offset) {
  require_matrix(scores, "causal_softmax");
  return masked_softmax(scores, offset, true);
}

Var max_pool_1d(const Var& series, std::size_t kernel) {
  if (kernel == 0) throw ParameterError("max_pool_1d: kernel must be >= 1");
  const auto [rows, len] = row_view(series.value());
  const std::size_t pooled = (len + kernel - 1) / kernel;
  const Tensor& x = series.value();
  Tensor out(with_last(series.shape(), pooled));
  std::vector<std::size_t> argmax(rows * pooled);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t w = 0; w < pooled; ++w) {
      const std::size_t begin = w * kernel;
      const std::size_t end = std::min(len, begin + kernel);
      std::size_t best = begin;
      for (std::size_t i = begin + 1; i < end; ++i) {
        if (x[r * len + i] > x[r * len + best]) best = i;
      }
      argmax[r * pooled + w] = r * len + best;
      out[r * pooled + w] = x[r * len + best];
    }
  }
  return make_node(std::move(out), {series}, [argmax = std::move(argmax)](GraphNode& n) {
    auto& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += n.grad[i];
  });
}

Var interpolate_linear(const Var& coarse, std::size_t target_len) {
  if (target_len == 0) throw ParameterError("interpolate_linear: target_len must be >= 1");
  const auto [rows, knots] = row_view(coarse.value());
  if (knots == target_len) return coarse;

  // Each output position mixes two neighbouring knots.
  std::vector<std::size_t> left(target_len), right(target_len);
  std::vector<double> frac(target_len, 0.0);
  for (std::size_t p = 0; p < target_len; ++p) {
    if (knots == 1 || target_len == 1) {
      left[p] = right[p] = 0;
      continue;
    }
    const double pos = static_cast<double>(p) * static_cast<double>(knots - 1) /
                       static_cast<double>(target_len - 1);
    const auto lo = std::min(static_cast<std::size_t>(std::floor(pos)), knots - 1);
    left[p] = lo;
    right[p] = std::min(lo + 1, knots - 1);
    frac[p] = pos - static_cast<double>(lo);
  }

  const Tensor& x = coarse.value();
  Tensor out(with_last(coarse.shape(), target_len));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t p = 0; p < target_len; ++p) {
      out[r * target_len + p] = (1.0 - frac[p]) * x[r * knots + left[p]] +
                                frac[p] * x[r * knots + right[p]];
    }
  }
  return make_node(std::move(out), {coarse},
                   [rows, knots, target_len, left = std::move(left),
                    right = std::move(right), frac = std::move(frac)](GraphNode& n) {
                     auto& g = n.parents[0]->grad_buffer();
                     for (std::size_t r = 0; r < rows; ++r) {
                       for (std::size_t p = 0; p < target_len; ++p) {
                         const double up = n.grad[r * target_len + p];
                         g[r * knots + left[p]] += (1.0 - frac[p]) * up;
                         g[r * knots + right[p]] += frac[p] * up;
                       }
                     }
                   });
}

Var gather(const Var& x, std::vector<std::size_t> indices, Shape out_shape) {
  if (shape_size(out_shape) != indices.size()) {
    throw DimensionError("gather: " + std::to_string(indices.size()) +
                         " indices cannot fill shape " + shape_to_string(out_shape));
  }
  const Tensor& xv = x.value();
  std::vector<double> data(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= xv.size()) throw DimensionError("gather: index out of range");
    data[i] = xv[indices[i]];
  }
  return make_node(Tensor(std::move(out_shape), std::move(data)), {x},
                   [indices = std::move(indices)](GraphNode& n) {
                     auto& g = n.parents[0]->grad_buffer();
                     for (std::size_t i = 0; i < indices.size(); ++i) g[indices[i]] += n.grad[i];
                   });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return make_node(std::move(out), {x}, [](GraphNode& n) { n.parents[0]->accumulate(n.grad); });
}

Var slice_cols(const Var& x, std::size_t start, std::size_t count) {
  require_matrix(x, "slice_cols");
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  if (count == 0 || start + count > cols) {
    throw DimensionError("slice_cols: [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") outside " +
                         shape_to_string(x.shape()));
  }
  std::vector<std::size_t> idx;
  idx.reserve(rows * count);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < count; ++c) idx.push_back(r * cols + start + c);
  }
  return gather(x, std::move(idx), {rows, count});
}

Var slice_rows(const Var& x, std::size_t start, std::size_t count) {
  require_matrix(x, "slice_rows");
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  if (count == 0 || start + count > rows) {
    throw DimensionError("slice_rows: [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") outside " +
                         shape_to_string(x.shape()));
  }
  const std::size_t offset = start * cols;
  Tensor out({count, cols});
  std::copy_n(x.value().data().begin() + static_cast<std::ptrdiff_t>(offset), count * cols,
              out.data().begin());
  return make_node(std::move(out), {x}, [offset](GraphNode& n) {
    auto& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < n.grad.size(); ++i) g[offset + i] += n.grad[i];
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: nothing to concatenate");
  const std::size_t rows = parts[0].value().rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_matrix(p, "concat_cols");
    if (p.shape()[0] != rows) throw DimensionError("concat_cols: row counts differ");
    total += p.shape()[1];
  }
  Tensor out({rows, total});
  std::size_t at = 0;
  for (const auto& p : parts) {
    const std::size_t c = p.shape()[1];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < c; ++j) out[r * total + at + j] = p.value()[r * c + j];
    }
    at += c;
  }
  std::vector<Var> parents(parts.begin(), parts.end());
  return make_node(std::move(out), parents, [rows, total](GraphNode& n) {
    std::size_t at = 0;
    for (auto& parent : n.parents) {
      const std::size_t c = parent->value.cols();
      if (parent->requires_grad) {
        auto& g = parent->grad_buffer();
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < c; ++j) g[r * c + j] += n.grad[r * total + at + j];
        }
      }
      at += c;
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: nothing to concatenate");
  const std::size_t cols = parts[0].value().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    require_matrix(p, "concat_rows");
    if (p.shape()[1] != cols) throw DimensionError("concat_rows: column counts differ");
    rows += p.shape()[0];
  }
  Tensor out({rows, cols});
  std::size_t at = 0;
  for (const auto& p : parts) {
    std::copy(p.value().data().begin(), p.value().data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(at));
    at += p.value().size();
  }
  std::vector<Var> parents(parts.begin(), parts.end());
  return make_node(std::move(out), parents, [](GraphNode& n) {
    std::size_t at = 0;
    for (auto& parent : n.parents) {
      const std::size_t len = parent->value.size();
      if (parent->requires_grad) {
        auto& g = parent->grad_buffer();
        for (std::size_t i = 0; i < len; ++i) g[i] += n.grad[at + i];
      }
      at += len;
    }
  });
}

Var sum(const Var& x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return make_node(Tensor::scalar(total), {x}, [](GraphNode& n) {
    auto& g = n.parents[0]->grad_buffer();
    const double up = n.grad[0];
    for (auto& v : g.storage()) v += up;
  });
}

Var mean(const Var& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.value().size()));
}

Var dropout(const Var& x, double rate, std::uint64_t seed) {
  if (rate < 0.0 || rate >= 1.0) throw ParameterError("dropout: rate must be in [0, 1)");
  if (rate == 0.0) return x;
  std::mt19937_64 rng(seed);
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor mask(x.shape());
  for (auto& m : mask.storage()) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    m = u < rate ? 0.0 : keep_scale;
  }
  return mul(x, Var(std::move(mask)));
}

}  // namespace vitalcast::ops
