#pragma once

#include <optional>
#include <string>

#include "vitalcast/models/model.hpp"

namespace vitalcast::models {

struct LinearLayer {
  Var weight;  // [in, out]
  Var bias;    // [out], empty when bias-free

  static LinearLayer create(ParameterStore& store, const std::string& name, std::size_t in,
                            std::size_t out, bool with_bias = true);
  Var operator()(const Var& x) const;
};

/// Gated residual network weights. `context` is absent when the GRN takes no
/// context input; `skip` projects the input when its width differs from the
/// output width.
struct GrnParams {
  LinearLayer input;                   // W2, b2
  std::optional<LinearLayer> context;  // W3 (bias-free)
  LinearLayer gate;                    // W1, b1 -> 2 * out
  std::optional<LinearLayer> skip;
  Var norm_gain;
  Var norm_shift;

  static GrnParams create(ParameterStore& store, const std::string& name, std::size_t in,
                          std::size_t hidden, std::size_t out, bool with_context = false);
  std::size_t output_dim() const { return norm_gain.value().size(); }
};

/// LayerNorm(a + GLU(W1 ELU(W2 a + W3 c + b2) + b1)); `a` is [n, in] and the
/// optional context `c` is [n, context_dim]. Dropout is applied to the gate
/// pre-activation in training mode.
Var grn_forward(const Var& a, const std::optional<Var>& c, const GrnParams& params,
                ForwardContext& ctx, double dropout = 0.0);

/// Gated recurrent cell of width d.
struct GruCell {
  LinearLayer input;   // [in, 3d]: update, reset, candidate
  LinearLayer hidden;  // [d, 3d]
  std::size_t width = 0;

  static GruCell create(ParameterStore& store, const std::string& name, std::size_t in,
                        std::size_t width);
  Var step(const Var& x, const Var& h) const;
};

}  // namespace vitalcast::models
