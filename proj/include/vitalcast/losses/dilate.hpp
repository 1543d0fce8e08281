#pragma once

#include <span>

#include "vitalcast/core/autograd.hpp"
#include "vitalcast/core/tensor.hpp"

namespace vitalcast::losses {

struct DilateConfig {
  double alpha = 0.5;
  double gamma = 0.01;
};

/// Squared off-diagonal penalty omega[h,j] = (h - j)^2 / k^2.
Tensor omega_matrix(std::size_t k);

/// <expected, omega>.
double temporal_loss(const Tensor& expected, const Tensor& omega);

struct DilateTerms {
  double shape = 0.0;
  double temporal = 0.0;
  double loss = 0.0;
};

DilateTerms dilate_terms(std::span<const double> pred, std::span<const double> target,
                         const DilateConfig& cfg);

/// alpha * soft-DTW + (1 - alpha) * temporal distortion.
double dilate_loss(std::span<const double> pred, std::span<const double> target,
                   const DilateConfig& cfg);

/// Exact gradient of dilate_loss w.r.t. pred, including the dependence of the
/// expected alignment on the costs in the temporal term.
Tensor dilate_backward(std::span<const double> pred, std::span<const double> target,
                       const DilateConfig& cfg);

/// Mean squared error between equal-length vectors and its gradient.
double mse_loss(std::span<const double> pred, std::span<const double> target);
Tensor mse_gradient(std::span<const double> pred, std::span<const double> target);

// Graph nodes over batches: pred is [batch, k], target is [batch, k]; the
// result is the per-row loss averaged over rows.
Var mse(const Var& pred, const Var& target);
Var dilate(const Var& pred, const Tensor& target, const DilateConfig& cfg);

}  // namespace vitalcast::losses
