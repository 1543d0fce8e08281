#pragma once

#include <functional>

#include "vitalcast/core/tensor.hpp"

namespace vitalcast {

/// Central-difference estimate (f(x + h e_i) - f(x - h e_i)) / 2h per coordinate.
Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f,
                                  const Tensor& x, double h = 1e-5);

/// ||a - b|| / max(||a||, ||b||), or the absolute difference norm when both
/// norms are below `floor`.
double relative_error(const Tensor& a, const Tensor& b, double floor = 1e-8);

}  // namespace vitalcast
