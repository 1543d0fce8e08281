#include "vitalcast/models/tft.hpp"

#include <cmath>

#include "vitalcast/core/ops.hpp"
#include "vitalcast/error.hpp"

namespace vitalcast::models {

namespace {

constexpr std::size_t kTotalSteps = kInputSteps + kHorizon;

// LayerNorm(skip + GLU(gate(x))), the gated skip connection used between
// sub-layers.
Var gated_skip(const Var& x, const Var& skip, const LinearLayer& gate, const Var& gain,
               const Var& shift, ForwardContext& ctx, double dropout) {
  Var g = gate(x);
  if (ctx.is_training() && dropout > 0.0) g = ops::dropout(g, dropout, ctx.next_seed());
  return ops::layer_norm(ops::add(skip, ops::glu(g)), gain, shift);
}

}  // namespace

VariableSelectionParams VariableSelectionParams::create(ParameterStore& store,
                                                        const std::string& name,
                                                        std::size_t n_variables, std::size_t d) {
  VariableSelectionParams p;
  for (std::size_t c = 0; c < n_variables; ++c) {
    p.per_variable.push_back(
        GrnParams::create(store, name + ".variable" + std::to_string(c), d, d, d));
  }
  p.selector = GrnParams::create(store, name + ".selector", n_variables * d, d, n_variables);
  return p;
}

VariableSelection variable_selection_forward(const std::vector<Var>& embeddings,
                                             const VariableSelectionParams& params,
                                             ForwardContext& ctx, double dropout) {
  if (embeddings.empty()) throw ContractError("variable selection needs at least one variable");
  if (embeddings.size() != params.per_variable.size()) {
    throw ContractError("variable selection: " + std::to_string(embeddings.size()) +
                        " embeddings for " + std::to_string(params.per_variable.size()) +
                        " variables");
  }
  VariableSelection out;
  out.weights = ops::softmax(grn_forward(ops::concat_cols(embeddings), std::nullopt,
                                         params.selector, ctx, dropout));
  for (std::size_t c = 0; c < embeddings.size(); ++c) {
    Var transformed = grn_forward(embeddings[c], std::nullopt, params.per_variable[c], ctx, dropout);
    Var weighted = ops::mul_col(transformed, ops::slice_cols(out.weights, c, 1));
    out.combined = out.combined ? ops::add(out.combined, weighted) : weighted;
  }
  return out;
}

AttentionParams AttentionParams::create(ParameterStore& store, const std::string& name,
                                        std::size_t d, std::size_t n_heads) {
  if (n_heads == 0 || d % n_heads != 0) {
    throw ParameterError("hidden dimension " + std::to_string(d) +
                         " must be divisible by the head count " + std::to_string(n_heads));
  }
  AttentionParams p;
  p.query = LinearLayer::create(store, name + ".query", d, d);
  p.key = LinearLayer::create(store, name + ".key", d, d);
  p.value = LinearLayer::create(store, name + ".value", d, d);
  p.output = LinearLayer::create(store, name + ".output", d, d);
  p.n_heads = n_heads;
  return p;
}

AttentionResult temporal_attention_forward(const Var& queries, const Var& keys_values,
                                           const AttentionParams& params,
                                           std::size_t causal_offset) {
  const std::size_t d = params.query.weight.shape()[0];
  if (queries.value().rank() != 2 || queries.shape()[1] != d ||
      keys_values.value().rank() != 2 || keys_values.shape()[1] != d) {
    throw ContractError("attention: queries " + shape_to_string(queries.shape()) +
                        " and keys " + shape_to_string(keys_values.shape()) +
                        " must have width " + std::to_string(d));
  }
  const std::size_t head_dim = d / params.n_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Var q = params.query(queries);
  Var k = params.key(keys_values);
  Var v = params.value(keys_values);
  AttentionResult out;
  std::vector<Var> heads;
  for (std::size_t h = 0; h < params.n_heads; ++h) {
    Var qh = ops::slice_cols(q, h * head_dim, head_dim);
    Var kh = ops::slice_cols(k, h * head_dim, head_dim);
    Var vh = ops::slice_cols(v, h * head_dim, head_dim);
    Var scores = ops::scale(ops::matmul(qh, ops::transpose(kh)), inv_sqrt);
    Var weights = ops::causal_softmax(scores, causal_offset);
    heads.push_back(ops::matmul(weights, vh));
    out.weights.push_back(weights);
  }
  out.context = params.output(params.n_heads == 1 ? heads[0] : ops::concat_cols(heads));
  return out;
}

TftModel::TftModel(const TftConfig& cfg, std::uint64_t seed) : cfg_(cfg), store_(seed) {
  const std::size_t d = cfg.hidden_dim;
  if (d == 0 || cfg.channels == 0) throw ParameterError("TFT widths must be positive");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw ParameterError("TFT dropout must be in [0, 1)");
  for (std::size_t c = 0; c < cfg.channels; ++c) {
    past_embeddings_.push_back(
        LinearLayer::create(store_, "embed.past" + std::to_string(c), 1, d));
  }
  future_embedding_ = LinearLayer::create(store_, "embed.future", 1, d);
  past_selection_ = VariableSelectionParams::create(store_, "select.past", cfg.channels, d);
  future_selection_ = VariableSelectionParams::create(store_, "select.future", 1, d);
  encoder_ = GruCell::create(store_, "encoder", d, d);
  decoder_ = GruCell::create(store_, "decoder", d, d);
  recurrent_gate_ = LinearLayer::create(store_, "recurrent.gate", d, 2 * d);
  recurrent_norm_gain_ = store_.add_constant("recurrent.norm.gain", {d}, 1.0);
  recurrent_norm_shift_ = store_.add_constant("recurrent.norm.shift", {d}, 0.0);
  attention_ = AttentionParams::create(store_, "attention", d, cfg.n_heads);
  attention_gate_ = LinearLayer::create(store_, "attention.gate", d, 2 * d);
  attention_norm_gain_ = store_.add_constant("attention.norm.gain", {d}, 1.0);
  attention_norm_shift_ = store_.add_constant("attention.norm.shift", {d}, 0.0);
  positionwise_ = GrnParams::create(store_, "positionwise", d, d, d);
  output_gate_ = LinearLayer::create(store_, "output.gate", d, 2 * d);
  output_norm_gain_ = store_.add_constant("output.norm.gain", {d}, 1.0);
  output_norm_shift_ = store_.add_constant("output.norm.shift", {d}, 0.0);
  head_ = LinearLayer::create(store_, "head", d, 1);
}

TftModel::Trace TftModel::trace(const Var& input, ForwardContext& ctx) const {
  check_input_shape(input, cfg_.channels);
  const std::size_t batch = input.shape()[0];
  const std::size_t d = cfg_.hidden_dim;
  const std::size_t width = cfg_.channels * kInputSteps;
  const double dropout = cfg_.dropout;

  // Time-major layout throughout: row t * batch + b.
  std::vector<Var> past;
  for (std::size_t c = 0; c < cfg_.channels; ++c) {
    std::vector<std::size_t> idx(kInputSteps * batch);
    for (std::size_t t = 0; t < kInputSteps; ++t) {
      for (std::size_t b = 0; b < batch; ++b) idx[t * batch + b] = b * width + c * kInputSteps + t;
    }
    past.push_back(past_embeddings_[c](ops::gather(input, std::move(idx), {kInputSteps * batch, 1})));
  }
  Trace trace;
  trace.encoder_selection = variable_selection_forward(past, past_selection_, ctx, dropout);

  Tensor time_index({kHorizon * batch, 1});
  for (std::size_t t = 0; t < kHorizon; ++t) {
    for (std::size_t b = 0; b < batch; ++b) {
      time_index[t * batch + b] =
          static_cast<double>(kInputSteps + t) / static_cast<double>(kTotalSteps - 1);
    }
  }
  const auto future = variable_selection_forward({future_embedding_(Var(time_index))},
                                                 future_selection_, ctx, dropout);

  Var h(Tensor({batch, d}, 0.0));
  std::vector<Var> states;
  states.reserve(kTotalSteps);
  for (std::size_t t = 0; t < kInputSteps; ++t) {
    h = encoder_.step(ops::slice_rows(trace.encoder_selection.combined, t * batch, batch), h);
    states.push_back(h);
  }
  for (std::size_t t = 0; t < kHorizon; ++t) {
    h = decoder_.step(ops::slice_rows(future.combined, t * batch, batch), h);
    states.push_back(h);
  }
  const Var recurrent = ops::concat_rows(states);
  const Var selected =
      ops::concat_rows(std::vector<Var>{trace.encoder_selection.combined, future.combined});
  const Var temporal = gated_skip(recurrent, selected, recurrent_gate_, recurrent_norm_gain_,
                                  recurrent_norm_shift_, ctx, dropout);

  // Attention runs per sequence; results are stacked sample-major (b * 36 + t).
  std::vector<Var> contexts;
  std::vector<std::size_t> decoder_rows;
  decoder_rows.reserve(batch * kHorizon * d);
  for (std::size_t b = 0; b < batch; ++b) {
    std::vector<std::size_t> idx;
    idx.reserve(kTotalSteps * d);
    for (std::size_t t = 0; t < kTotalSteps; ++t) {
      for (std::size_t j = 0; j < d; ++j) idx.push_back((t * batch + b) * d + j);
    }
    decoder_rows.insert(decoder_rows.end(), idx.begin() + kInputSteps * d, idx.end());
    Var sequence = ops::gather(temporal, std::move(idx), {kTotalSteps, d});
    auto att = temporal_attention_forward(ops::slice_rows(sequence, kInputSteps, kHorizon),
                                          sequence, attention_, kInputSteps);
    contexts.push_back(att.context);
    trace.attention.push_back(std::move(att));
  }
  const Var attended = ops::concat_rows(contexts);
  const Var decoder_temporal = ops::gather(temporal, std::move(decoder_rows), {batch * kHorizon, d});

  Var x = gated_skip(attended, decoder_temporal, attention_gate_, attention_norm_gain_,
                     attention_norm_shift_, ctx, dropout);
  x = grn_forward(x, std::nullopt, positionwise_, ctx, dropout);
  x = gated_skip(x, decoder_temporal, output_gate_, output_norm_gain_, output_norm_shift_, ctx, 0.0);
  trace.forecast = ops::reshape(head_(x), {batch, kHorizon});
  return trace;
}

Var TftModel::forward(const Var& input, ForwardContext& ctx) const {
  return trace(input, ctx).forecast;
}

}  // namespace vitalcast::models
