#include "vitalcast/losses/dilate.hpp"

#include "transition_weights.hpp"
#include "vitalcast/core/ops.hpp"
#include "vitalcast/error.hpp"
#include "vitalcast/losses/soft_dtw.hpp"

namespace vitalcast::losses {

namespace {

void require_equal_lengths(std::span<const double> pred, std::span<const double> target,
                           const char* op) {
  if (pred.size() != target.size()) {
    throw ContractError(std::string(op) + ": prediction length " +
                        std::to_string(pred.size()) + " != target length " +
                        std::to_string(target.size()));
  }
  if (pred.empty()) throw ContractError(std::string(op) + ": empty sequences");
}

void require_config(const DilateConfig& cfg) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
    throw ParameterError("DILATE alpha must lie in [0, 1], got " + std::to_string(cfg.alpha));
  }
  if (!(cfg.gamma > 0.0)) {
    throw ParameterError("DILATE gamma must be > 0, got " + std::to_string(cfg.gamma));
  }
}

// Directional derivative of the expected alignment along `direction` in cost
// space. Because the expected alignment is the gradient of soft-DTW, this is a
// Hessian-vector product, and by symmetry it equals the gradient of
// <expected, direction> w.r.t. the costs.
//
// Forward tangent:  dR[p] = dir[p] + sum_s w[p,s] dR[s]
// Reverse tangent:  dE[s] = sum_p dE[p] w[p,s] + E[p] w[p,s] (dR[p] - dir[p] - dR[s]) / gamma
Tensor expected_path_directional(const AlignmentStats& stats, const Tensor& delta,
                                 const Tensor& direction) {
  const std::size_t m = delta.dim(0), n = delta.dim(1);
  const auto tw = detail::transition_weights(stats.accumulated, delta, stats.gamma);
  const auto idx = [&tw](std::size_t i, std::size_t j) { return tw.index(i, j); };

  std::vector<double> dr((m + 1) * (n + 1), 0.0);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const auto& w = tw.w[idx(i, j)];
      double acc = direction.at(i - 1, j - 1);
      for (std::size_t s = 0; s < 3; ++s) {
        acc += w[s] * dr[idx(i - detail::kSteps[s][0], j - detail::kSteps[s][1])];
      }
      dr[idx(i, j)] = acc;
    }
  }

  std::vector<double> de((m + 1) * (n + 1), 0.0);
  for (std::size_t i = m; i >= 1; --i) {
    for (std::size_t j = n; j >= 1; --j) {
      const auto& w = tw.w[idx(i, j)];
      const double e = stats.expected.at(i - 1, j - 1);
      const double inflow = dr[idx(i, j)] - direction.at(i - 1, j - 1);
      for (std::size_t s = 0; s < 3; ++s) {
        const std::size_t pi = i - detail::kSteps[s][0], pj = j - detail::kSteps[s][1];
        if (pi < 1 || pj < 1 || w[s] == 0.0) continue;
        de[idx(pi, pj)] += w[s] * (de[idx(i, j)] + e * (inflow - dr[idx(pi, pj)]) / stats.gamma);
      }
    }
  }

  Tensor out({m, n});
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) out.at(i - 1, j - 1) = de[idx(i, j)];
  }
  return out;
}

}  // namespace

Tensor omega_matrix(std::size_t k) {
  if (k == 0) throw ContractError("omega_matrix: k must be >= 1");
  Tensor omega({k, k});
  const double k2 = static_cast<double>(k * k);
  for (std::size_t h = 0; h < k; ++h) {
    for (std::size_t j = 0; j < k; ++j) {
      const double d = static_cast<double>(h) - static_cast<double>(j);
      omega.at(h, j) = d * d / k2;
    }
  }
  return omega;
}

double temporal_loss(const Tensor& expected, const Tensor& omega) {
  if (expected.shape() != omega.shape()) {
    throw DimensionError("temporal_loss: alignment " + shape_to_string(expected.shape()) +
                         " vs penalty " + shape_to_string(omega.shape()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) total += expected[i] * omega[i];
  return total;
}

DilateTerms dilate_terms(std::span<const double> pred, std::span<const double> target,
                         const DilateConfig& cfg) {
  require_equal_lengths(pred, target, "dilate_loss");
  require_config(cfg);
  const Tensor delta = cost_matrix(pred, target);
  const auto stats = soft_dtw_alignment(delta, cfg.gamma);
  DilateTerms terms;
  terms.shape = stats.value;
  terms.temporal = temporal_loss(stats.expected, omega_matrix(pred.size()));
  terms.loss = cfg.alpha * terms.shape + (1.0 - cfg.alpha) * terms.temporal;
  return terms;
}

double dilate_loss(std::span<const double> pred, std::span<const double> target,
                   const DilateConfig& cfg) {
  return dilate_terms(pred, target, cfg).loss;
}

Tensor dilate_backward(std::span<const double> pred, std::span<const double> target,
                       const DilateConfig& cfg) {
  require_equal_lengths(pred, target, "dilate_backward");
  require_config(cfg);
  const std::size_t k = pred.size();
  const Tensor delta = cost_matrix(pred, target);
  const auto stats = soft_dtw_alignment(delta, cfg.gamma);

  // d loss / d delta, then chain through delta[i,j] = (pred_i - target_j)^2.
  Tensor cost_grad({k, k}, 0.0);
  if (cfg.alpha > 0.0) {
    for (std::size_t i = 0; i < cost_grad.size(); ++i) {
      cost_grad[i] += cfg.alpha * stats.expected[i];
    }
  }
  if (cfg.alpha < 1.0) {
    const Tensor temporal = expected_path_directional(stats, delta, omega_matrix(k));
    for (std::size_t i = 0; i < cost_grad.size(); ++i) {
      cost_grad[i] += (1.0 - cfg.alpha) * temporal[i];
    }
  }
  Tensor grad({k}, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      grad[i] += cost_grad.at(i, j) * 2.0 * (pred[i] - target[j]);
    }
  }
  return grad;
}

double mse_loss(std::span<const double> pred, std::span<const double> target) {
  require_equal_lengths(pred, target, "mse_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    total += d * d;
  }
  return total / static_cast<double>(pred.size());
}

Tensor mse_gradient(std::span<const double> pred, std::span<const double> target) {
  require_equal_lengths(pred, target, "mse_gradient");
  Tensor grad({pred.size()});
  const double scale = 2.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) grad[i] = scale * (pred[i] - target[i]);
  return grad;
}

Var mse(const Var& pred, const Var& target) {
  if (pred.shape() != target.shape()) {
    throw ContractError("mse: prediction shape " + shape_to_string(pred.shape()) +
                        " != target shape " + shape_to_string(target.shape()));
  }
  return ops::mean(ops::square(ops::sub(pred, target)));
}

Var dilate(const Var& pred, const Tensor& target, const DilateConfig& cfg) {
  if (pred.shape() != target.shape() || pred.value().rank() != 2) {
    throw ContractError("dilate: prediction shape " + shape_to_string(pred.shape()) +
                        " != target shape " + shape_to_string(target.shape()));
  }
  require_config(cfg);
  const std::size_t batch = target.dim(0), k = target.dim(1);
  const auto row = [k](const Tensor& t, std::size_t r) {
    return t.data().subspan(r * k, k);
  };
  // Fixed row order keeps the reduction reproducible.
  double total = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    total += dilate_loss(row(pred.value(), r), row(target, r), cfg);
  }
  const double inv_batch = 1.0 / static_cast<double>(batch);
  return make_node(Tensor::scalar(total * inv_batch), {pred},
                   [target, cfg, batch, k, inv_batch, row](GraphNode& n) {
                     const Tensor& p = n.parents[0]->value;
                     auto& g = n.parents[0]->grad_buffer();
                     const double up = n.grad[0] * inv_batch;
                     for (std::size_t r = 0; r < batch; ++r) {
                       const Tensor gr = dilate_backward(row(p, r), row(target, r), cfg);
                       for (std::size_t i = 0; i < k; ++i) g[r * k + i] += up * gr[i];
                     }
                   });
}

}  // namespace vitalcast::losses
