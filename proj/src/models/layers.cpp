#include "vitalcast/models/layers.hpp"

#include "vitalcast/core/ops.hpp"
#include "vitalcast/error.hpp"

namespace vitalcast::models {

LinearLayer LinearLayer::create(ParameterStore& store, const std::string& name, std::size_t in,
                                std::size_t out, bool with_bias) {
  LinearLayer layer;
  layer.weight = store.add(name + ".weight", {in, out}, in);
  if (with_bias) layer.bias = store.add(name + ".bias", {out}, in);
  return layer;
}

Var LinearLayer::operator()(const Var& x) const {
  return bias ? ops::linear(x, weight, bias) : ops::linear(x, weight);
}

GrnParams GrnParams::create(ParameterStore& store, const std::string& name, std::size_t in,
                            std::size_t hidden, std::size_t out, bool with_context) {
  GrnParams p;
  p.input = LinearLayer::create(store, name + ".input", in, hidden);
  if (with_context) p.context = LinearLayer::create(store, name + ".context", in, hidden, false);
  p.gate = LinearLayer::create(store, name + ".gate", hidden, 2 * out);
  if (in != out) p.skip = LinearLayer::create(store, name + ".skip", in, out, false);
  p.norm_gain = store.add_constant(name + ".norm.gain", {out}, 1.0);
  p.norm_shift = store.add_constant(name + ".norm.shift", {out}, 0.0);
  return p;
}

Var grn_forward(const Var& a, const std::optional<Var>& c, const GrnParams& params,
                ForwardContext& ctx, double dropout) {
  const std::size_t in = params.input.weight.shape()[0];
  if (a.value().rank() != 2 || a.shape()[1] != in) {
    throw ContractError("grn_forward: primary input " + shape_to_string(a.shape()) +
                        " does not match input width " + std::to_string(in));
  }
  Var pre = params.input(a);
  if (c) {
    if (!params.context) throw ContractError("grn_forward: context given to a context-free GRN");
    pre = ops::add(pre, (*params.context)(*c));
  }
  Var eta2 = ops::elu(pre);
  Var eta1 = params.gate(eta2);
  if (ctx.is_training() && dropout > 0.0) eta1 = ops::dropout(eta1, dropout, ctx.next_seed());
  Var residual = params.skip ? (*params.skip)(a) : a;
  return ops::layer_norm(ops::add(residual, ops::glu(eta1)), params.norm_gain,
                         params.norm_shift);
}

GruCell GruCell::create(ParameterStore& store, const std::string& name, std::size_t in,
                        std::size_t width) {
  GruCell cell;
  cell.input = LinearLayer::create(store, name + ".input", in, 3 * width);
  cell.hidden = LinearLayer::create(store, name + ".hidden", width, 3 * width);
  cell.width = width;
  return cell;
}

Var GruCell::step(const Var& x, const Var& h) const {
  const std::size_t d = width;
  Var xi = input(x);
  Var hh = hidden(h);
  Var update = ops::sigmoid(ops::add(ops::slice_cols(xi, 0, d), ops::slice_cols(hh, 0, d)));
  Var reset = ops::sigmoid(ops::add(ops::slice_cols(xi, d, d), ops::slice_cols(hh, d, d)));
  Var candidate = ops::tanh(
      ops::add(ops::slice_cols(xi, 2 * d, d), ops::mul(reset, ops::slice_cols(hh, 2 * d, d))));
  // h' = candidate + update * (h - candidate)
  return ops::add(candidate, ops::mul(update, ops::sub(h, candidate)));
}

}  // namespace vitalcast::models
