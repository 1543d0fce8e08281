#pragma once

#include <string>
#include <vector>

#include "vitalcast/eval/metrics.hpp"

namespace vitalcast::experiment {

/// Grid of rows (model, covariate mode) by columns (MSE* L-1, MSE* L-2,
/// DTW L-1, DTW L-2) for MBP then HR. MSE* is MSE x 1e4, L-1 the MSE loss and
/// L-2 the DILATE loss. Untrained models fill both loss columns. Missing
/// cells print as "—"; rows appear only for models present in `reports`.
std::string render_results_table(const std::vector<eval::EvalReport>& reports);

std::string display_name(const std::string& model);

}  // namespace vitalcast::experiment
