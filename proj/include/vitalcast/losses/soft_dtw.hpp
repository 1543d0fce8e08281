#pragma once

#include <span>

#include "vitalcast/core/tensor.hpp"

namespace vitalcast::losses {

/// Pairwise squared differences delta[i,j] = (pred_i - target_j)^2.
Tensor cost_matrix(std::span<const double> pred, std::span<const double> target);

/// Soft-DTW dynamic-programming state.
///
/// `accumulated` is the (m+1) x (n+1) soft-min table with a +inf border
/// except accumulated[0,0] = 0, so accumulated[i,j] (1-based) is the soft-DTW
/// of the prefixes. `expected` is the m x n expected alignment, i.e. the
/// gradient of the value w.r.t. the cost matrix.
struct AlignmentStats {
  Tensor accumulated;
  Tensor expected;
  double gamma = 0.0;
  double value = 0.0;
};

struct SoftDtwResult {
  double value;
  Tensor accumulated;
};

/// -gamma log sum_A exp(-<A, delta> / gamma) over monotone alignments, by the
/// log-sum-exp stabilized recursion. Throws ParameterError when gamma <= 0.
SoftDtwResult soft_dtw(const Tensor& delta, double gamma);

/// Reverse recursion over `accumulated`: probability that the Gibbs path
/// distribution at temperature gamma passes through each cell.
Tensor soft_dtw_expected_path(const Tensor& accumulated, const Tensor& delta, double gamma);

/// Forward value plus expected alignment in one call.
AlignmentStats soft_dtw_alignment(const Tensor& delta, double gamma);

/// Gradient of soft_dtw(cost_matrix(pred, target)) w.r.t. pred.
Tensor soft_dtw_gradient(std::span<const double> pred, std::span<const double> target,
                         double gamma);

/// Classical DTW with squared local cost and steps down, right, diagonal.
double hard_dtw(const Tensor& delta);

}  // namespace vitalcast::losses
