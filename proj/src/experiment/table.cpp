#include "vitalcast/experiment/table.hpp"

#include <cmath>
#include <cstdio>
#include <optional>

namespace vitalcast::experiment {

std::string display_name(const std::string& model) {
  if (model == "persistence") return "Persistence";
  if (model == "nhits") return "N-HiTS";
  if (model == "nbeats") return "N-BEATS";
  if (model == "tft") return "TFT";
  return model;
}

namespace {

constexpr int kCell = 8;

// Pads by code points so the multibyte dash lines up with ASCII cells.
std::string pad(const std::string& s, int width) {
  int shown = 0;
  for (unsigned char ch : s) shown += (ch & 0xC0) != 0x80 ? 1 : 0;
  return s + std::string(static_cast<std::size_t>(std::max(0, width - shown)), ' ');
}

std::string number(std::optional<double> v) {
  if (!v) return "—";
  char buf[32];
  // Two decimals in the results layout; small scaled-space values keep
  // four so they do not collapse to 0.00.
  std::snprintf(buf, sizeof buf, std::abs(*v) >= 0.995 ? "%.2f" : "%.4f", *v);
  return buf;
}

const eval::EvalReport* find(const std::vector<eval::EvalReport>& reports,
                             const std::string& model, std::optional<bool> covariates,
                             data::Channel target, const std::string& loss) {
  for (const auto& r : reports) {
    if (r.key.model != model || r.key.target != target) continue;
    if (covariates && r.key.covariates != *covariates) continue;
    if (!r.key.loss.empty() && r.key.loss != loss) continue;
    return &r;
  }
  return nullptr;
}

}  // namespace

std::string render_results_table(const std::vector<eval::EvalReport>& reports) {
  struct Row {
    std::string model;
    std::optional<bool> covariates;  // nullopt: not applicable
  };
  std::vector<Row> rows;
  for (const char* model : {"persistence", "nhits", "nbeats", "tft"}) {
    const bool untrained = std::string(model) == "persistence";
    for (bool cov : {true, false}) {
      bool present = false;
      for (const auto& r : reports) present |= r.key.model == model && (untrained || r.key.covariates == cov);
      if (!present) continue;
      rows.push_back({model, untrained ? std::nullopt : std::optional<bool>(cov)});
      if (untrained) break;
    }
  }

  const std::string lead = pad("Models", 13) + pad("Cov.", 7);
  const std::string blank(lead.size(), ' ');
  std::string out;
  out += lead + "| " + pad("Mean Blood Pressure", 4 * kCell) + "| Heart Rate\n";
  out += blank + "| " + pad("MSE*", 2 * kCell) + pad("DTW", 2 * kCell) + "| " +
         pad("MSE*", 2 * kCell) + "DTW\n";
  std::string losses_row;
  for (int i = 0; i < 4; ++i) losses_row += pad(i % 2 == 0 ? "L-1" : "L-2", kCell);
  std::string third = blank + "| " + losses_row + "| " + losses_row;
  while (third.back() == ' ') third.pop_back();
  out += third + "\n";
  out += std::string(lead.size(), '-') + "+" + std::string(4 * kCell + 1, '-') + "+" +
         std::string(4 * kCell + 1, '-') + "\n";

  for (const auto& row : rows) {
    std::string line = pad(display_name(row.model), 13) +
                       pad(!row.covariates ? "-" : (*row.covariates ? "W C" : "W/o C"), 7);
    for (data::Channel target : {data::Channel::kMbp, data::Channel::kHr}) {
      std::string cells;
      for (bool dtw : {false, true}) {
        for (const char* loss : {"mse", "dilate"}) {
          const auto* r = find(reports, row.model, row.covariates, target, loss);
          std::optional<double> v;
          if (r != nullptr) v = dtw ? r->dtw : r->mse_scaled;
          cells += pad(number(v), kCell);
        }
      }
      line += "| " + cells;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  out += "* MSE x 1e4. L-1: trained with MSE loss; L-2: trained with DILATE loss.\n";
  return out;
}

}  // namespace vitalcast::experiment
