#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vitalcast/core/autograd.hpp"

namespace vitalcast::ops {

enum class Activation { kRelu, kElu, kSigmoid, kTanh };

// Elementwise arithmetic on equal shapes.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var square(const Var& a);

/// x[n,m] + bias[m], bias broadcast over rows.
Var add_row(const Var& x, const Var& bias);
/// x[n,d] * w[n,1], w broadcast over columns.
Var mul_col(const Var& x, const Var& w);

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);

/// input[n,in] . weights[in,out] + bias[out].
Var linear(const Var& input, const Var& weights, const Var& bias);
/// Bias-free projection input[n,in] . weights[in,out].
Var linear(const Var& input, const Var& weights);

Var activation(const Var& input, Activation kind);
inline Var relu(const Var& x) { return activation(x, Activation::kRelu); }
inline Var elu(const Var& x) { return activation(x, Activation::kElu); }
inline Var sigmoid(const Var& x) { return activation(x, Activation::kSigmoid); }
inline Var tanh(const Var& x) { return activation(x, Activation::kTanh); }

/// First half of the last axis gated by the sigmoid of the second half.
Var glu(const Var& input);

inline constexpr double kLayerNormEpsilon = 1e-5;
/// Per-row standardization over the last axis, then gain/shift.
Var layer_norm(const Var& input, const Var& gain, const Var& shift);

/// Softmax over the last axis.
Var softmax(const Var& input);
/// Row-wise softmax where row i only sees columns j <= offset + i. Masked
/// entries are exactly zero.
Var causal_softmax(const Var& scores, std::size_t offset);

/// Non-overlapping max pooling along the last axis; the final partial window
/// uses the elements it has. Gradient goes to the first maximal index.
Var max_pool_1d(const Var& series, std::size_t kernel);

/// Piecewise-linear upsampling of the last axis: m knots placed uniformly on
/// [0, target_len - 1].
Var interpolate_linear(const Var& coarse, std::size_t target_len);

/// out.flat[i] = x.flat[indices[i]]; the backward pass scatter-adds.
Var gather(const Var& x, std::vector<std::size_t> indices, Shape out_shape);

/// Same data, new shape.
Var reshape(const Var& x, Shape shape);

Var slice_cols(const Var& x, std::size_t start, std::size_t count);
Var slice_rows(const Var& x, std::size_t start, std::size_t count);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);

Var sum(const Var& x);
Var mean(const Var& x);

/// Inverted dropout driven by an explicit seed; identity when rate is 0.
Var dropout(const Var& x, double rate, std::uint64_t seed);

}  // namespace vitalcast::ops
