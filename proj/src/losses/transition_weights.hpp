#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "vitalcast/core/tensor.hpp"

namespace vitalcast::losses::detail {

// Predecessor offsets of a cell: from above, from the left, diagonal.
inline constexpr std::array<std::array<std::size_t, 2>, 3> kSteps{{{1, 0}, {0, 1}, {1, 1}}};

// Soft-min weights w[p][s] with which cell p (1-based, row-major over the
// (m+1) x (n+1) table) draws on predecessor s = p - kSteps[s]. Border
// predecessors at +inf get weight 0. The three weights of a cell sum to 1.
struct TransitionWeights {
  std::size_t rows = 0;  // m
  std::size_t cols = 0;  // n
  std::vector<std::array<double, 3>> w;  // indexed by i * (n + 1) + j

  std::size_t index(std::size_t i, std::size_t j) const { return i * (cols + 1) + j; }
};

TransitionWeights transition_weights(const Tensor& accumulated, const Tensor& delta,
                                     double gamma);

}  // namespace vitalcast::losses::detail
