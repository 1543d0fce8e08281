#pragma once

#include <string>
#include <vector>

#include "vitalcast/models/layers.hpp"

namespace vitalcast::models {

struct TftConfig {
  std::size_t hidden_dim = 64;
  std::size_t n_heads = 4;
  double dropout = 0.1;
  std::size_t channels = 1;
};

/// Per-variable GRNs plus the GRN that scores variables from their
/// concatenated embeddings.
struct VariableSelectionParams {
  std::vector<GrnParams> per_variable;
  GrnParams selector;

  static VariableSelectionParams create(ParameterStore& store, const std::string& name,
                                        std::size_t n_variables, std::size_t d);
};

struct VariableSelection {
  Var combined;  // [n, d]
  Var weights;   // [n, C], rows sum to 1
};

/// Softmax-weighted combination of per-variable GRN transforms.
VariableSelection variable_selection_forward(const std::vector<Var>& embeddings,
                                             const VariableSelectionParams& params,
                                             ForwardContext& ctx, double dropout = 0.0);

struct AttentionParams {
  LinearLayer query;
  LinearLayer key;
  LinearLayer value;
  LinearLayer output;
  std::size_t n_heads = 1;

  static AttentionParams create(ParameterStore& store, const std::string& name, std::size_t d,
                                std::size_t n_heads);
};

struct AttentionResult {
  Var context;               // [n_queries, d]
  std::vector<Var> weights;  // one [n_queries, n_keys] matrix per head
};

/// Scaled dot-product multi-head attention for one sequence. Query row t may
/// only attend to key rows j <= causal_offset + t; heads are concatenated and
/// projected.
AttentionResult temporal_attention_forward(const Var& queries, const Var& keys_values,
                                           const AttentionParams& params,
                                           std::size_t causal_offset);

/// Point-forecast temporal fusion transformer: per-step variable selection,
/// recurrent encoder over the lookback, recurrent decoder over the horizon fed
/// with a normalized time index, gated skip connections, causal multi-head
/// attention, a position-wise GRN and a linear head.
class TftModel final : public ForecastModel {
 public:
  TftModel(const TftConfig& cfg, std::uint64_t seed);

  std::string kind() const override { return "tft"; }
  std::size_t channels() const override { return cfg_.channels; }
  Var forward(const Var& input, ForwardContext& ctx) const override;
  std::vector<NamedParameter> parameters() const override { return store_.all(); }
  const TftConfig& config() const { return cfg_; }

  /// Intermediate values of one forward pass.
  struct Trace {
    Var forecast;
    VariableSelection encoder_selection;
    std::vector<AttentionResult> attention;  // one per batch element
  };
  Trace trace(const Var& input, ForwardContext& ctx) const;

 private:
  TftConfig cfg_;
  ParameterStore store_;
  std::vector<LinearLayer> past_embeddings_;
  LinearLayer future_embedding_;
  VariableSelectionParams past_selection_;
  VariableSelectionParams future_selection_;
  GruCell encoder_;
  GruCell decoder_;
  LinearLayer recurrent_gate_;
  Var recurrent_norm_gain_, recurrent_norm_shift_;
  AttentionParams attention_;
  LinearLayer attention_gate_;
  Var attention_norm_gain_, attention_norm_shift_;
  GrnParams positionwise_;
  LinearLayer output_gate_;
  Var output_norm_gain_, output_norm_shift_;
  LinearLayer head_;
};

}  // namespace vitalcast::models
