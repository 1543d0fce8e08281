#include "vitalcast/losses/soft_dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "transition_weights.hpp"
#include "vitalcast/error.hpp"

namespace vitalcast::losses {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_matrix(const Tensor& delta, const char* op) {
  if (delta.rank() != 2) {
    throw DimensionError(std::string(op) + ": cost matrix must be 2-D, got " +
                         shape_to_string(delta.shape()));
  }
}

void require_gamma(double gamma) {
  if (!(gamma > 0.0)) {
    throw ParameterError("soft-DTW smoothing gamma must be > 0, got " + std::to_string(gamma));
  }
}

// -gamma log(exp(-a/gamma) + exp(-b/gamma) + exp(-c/gamma)), +inf entries ignored.
double soft_min(double a, double b, double c, double gamma) {
  const double lo = std::min({a, b, c});
  if (lo == kInf) return kInf;
  double s = 0.0;
  for (double v : {a, b, c}) {
    if (v != kInf) s += std::exp(-(v - lo) / gamma);
  }
  return lo - gamma * std::log(s);
}

}  // namespace

Tensor cost_matrix(std::span<const double> pred, std::span<const double> target) {
  if (pred.empty() || target.empty()) {
    throw ContractError("cost_matrix: sequences must be non-empty");
  }
  Tensor delta({pred.size(), target.size()});
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < target.size(); ++j) {
      const double d = pred[i] - target[j];
      delta.at(i, j) = d * d;
    }
  }
  return delta;
}

SoftDtwResult soft_dtw(const Tensor& delta, double gamma) {
  require_gamma(gamma);
  require_matrix(delta, "soft_dtw");
  const std::size_t m = delta.dim(0), n = delta.dim(1);
  Tensor r({m + 1, n + 1}, kInf);
  r.at(0, 0) = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      r.at(i, j) = delta.at(i - 1, j - 1) +
                   soft_min(r.at(i - 1, j), r.at(i, j - 1), r.at(i - 1, j - 1), gamma);
    }
  }
  const double value = r.at(m, n);
  return {value, std::move(r)};
}

namespace detail {

TransitionWeights transition_weights(const Tensor& accumulated, const Tensor& delta,
                                     double gamma) {
  const std::size_t m = delta.dim(0), n = delta.dim(1);
  TransitionWeights tw;
  tw.rows = m;
  tw.cols = n;
  tw.w.assign((m + 1) * (n + 1), {0.0, 0.0, 0.0});
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      // accumulated - delta is the soft-min over the predecessors.
      const double smin = accumulated.at(i, j) - delta.at(i - 1, j - 1);
      auto& w = tw.w[tw.index(i, j)];
      for (std::size_t s = 0; s < 3; ++s) {
        const double pred = accumulated.at(i - kSteps[s][0], j - kSteps[s][1]);
        w[s] = pred == kInf ? 0.0 : std::exp((smin - pred) / gamma);
      }
    }
  }
  return tw;
}

}  // namespace detail

Tensor soft_dtw_expected_path(const Tensor& accumulated, const Tensor& delta, double gamma) {
  require_gamma(gamma);
  require_matrix(delta, "soft_dtw_expected_path");
  const std::size_t m = delta.dim(0), n = delta.dim(1);
  if (accumulated.rank() != 2 || accumulated.dim(0) != m + 1 || accumulated.dim(1) != n + 1) {
    throw DimensionError("soft_dtw_expected_path: accumulated table must be " +
                         shape_to_string({m + 1, n + 1}));
  }
  const auto tw = detail::transition_weights(accumulated, delta, gamma);
  // e has the same 1-based layout as the table; row/col 0 stay unused.
  std::vector<double> e((m + 1) * (n + 1), 0.0);
  e[tw.index(m, n)] = 1.0;
  for (std::size_t i = m; i >= 1; --i) {
    for (std::size_t j = n; j >= 1; --j) {
      const double mass = e[tw.index(i, j)];
      const auto& w = tw.w[tw.index(i, j)];
      for (std::size_t s = 0; s < 3; ++s) {
        const std::size_t pi = i - detail::kSteps[s][0], pj = j - detail::kSteps[s][1];
        if (pi >= 1 && pj >= 1) e[tw.index(pi, pj)] += mass * w[s];
      }
    }
  }
  Tensor expected({m, n});
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) expected.at(i - 1, j - 1) = e[tw.index(i, j)];
  }
  return expected;
}

AlignmentStats soft_dtw_alignment(const Tensor& delta, double gamma) {
  auto [value, accumulated] = soft_dtw(delta, gamma);
  AlignmentStats stats;
  stats.expected = soft_dtw_expected_path(accumulated, delta, gamma);
  stats.accumulated = std::move(accumulated);
  stats.gamma = gamma;
  stats.value = value;
  return stats;
}

Tensor soft_dtw_gradient(std::span<const double> pred, std::span<const double> target,
                         double gamma) {
  const Tensor delta = cost_matrix(pred, target);
  const auto stats = soft_dtw_alignment(delta, gamma);
  Tensor grad({pred.size()}, 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < target.size(); ++j) {
      grad[i] += stats.expected.at(i, j) * 2.0 * (pred[i] - target[j]);
    }
  }
  return grad;
}

double hard_dtw(const Tensor& delta) {
  require_matrix(delta, "hard_dtw");
  const std::size_t m = delta.dim(0), n = delta.dim(1);
  std::vector<double> r((m + 1) * (n + 1), kInf);
  auto at = [n](std::size_t i, std::size_t j) { return i * (n + 1) + j; };
  r[0] = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      r[at(i, j)] = delta.at(i - 1, j - 1) +
                    std::min({r[at(i - 1, j)], r[at(i, j - 1)], r[at(i - 1, j - 1)]});
    }
  }
  return r[at(m, n)];
}

}  // namespace vitalcast::losses
