#include "vitalcast/experiment/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "vitalcast/error.hpp"
#include "vitalcast/models/basis.hpp"
#include "vitalcast/models/tft.hpp"

namespace vitalcast::experiment {

std::string loss_name(LossKind k) { return k == LossKind::kMse ? "mse" : "dilate"; }

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Problems are reported as plain strings and prefixed with the location later.
struct Invalid {
  std::string message;
};

std::size_t to_size(const std::string& v) {
  std::size_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw Invalid{"expected a non-negative integer, got '" + v + "'"};
  }
  return out;
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw Invalid{"expected a finite number, got '" + v + "'"};
  }
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw Invalid{"expected true or false, got '" + v + "'"};
}

std::vector<std::size_t> to_list(const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(to_size(trim(item)));
  if (out.empty()) throw Invalid{"expected a comma-separated list"};
  return out;
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
  bool identity = false;  // part of the trained model's meaning
};

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  using S = const std::string&;
  static const std::vector<Field> table = {
      {"data.source",
       [](C& c, S v) {
         if (v == "synthetic") c.data.source = DataSource::kSynthetic;
         else if (v == "csv") c.data.source = DataSource::kCsv;
         else if (v == "sine") c.data.source = DataSource::kSine;
         else throw Invalid{"expected synthetic, csv or sine, got '" + v + "'"};
       },
       [](const C& c) -> std::string {
         switch (c.data.source) {
           case DataSource::kSynthetic: return "synthetic";
           case DataSource::kCsv: return "csv";
           case DataSource::kSine: return "sine";
         }
         return "?";
       }},
      {"data.vitals", [](C& c, S v) { c.data.vitals = v; },
       [](const C& c) { return c.data.vitals.string(); }},
      {"data.diagnoses", [](C& c, S v) { c.data.diagnoses = v; },
       [](const C& c) { return c.data.diagnoses.string(); }},
      {"data.patients", [](C& c, S v) { c.data.patients = to_size(v); },
       [](const C& c) { return std::to_string(c.data.patients); }},
      {"data.samples", [](C& c, S v) { c.data.samples = to_size(v); },
       [](const C& c) { return std::to_string(c.data.samples); }},
      {"data.deterioration", [](C& c, S v) { c.data.deterioration = to_double(v); },
       [](const C& c) { return fmt(c.data.deterioration); }},
      {"data.noise", [](C& c, S v) { c.data.noise = to_double(v); },
       [](const C& c) { return fmt(c.data.noise); }},
      {"data.seed", [](C& c, S v) { c.data.seed = to_size(v); },
       [](const C& c) { return std::to_string(c.data.seed); }},
      {"model",
       [](C& c, S v) {
         if (v != "persistence" && v != "nbeats" && v != "nhits" && v != "tft") {
           throw Invalid{"expected persistence, nbeats, nhits or tft, got '" + v + "'"};
         }
         c.model.kind = v;
       },
       [](const C& c) { return c.model.kind; }, true},
      {"model.stacks", [](C& c, S v) { c.model.stacks = to_size(v); },
       [](const C& c) { return std::to_string(c.model.stacks); }, true},
      {"model.blocks", [](C& c, S v) { c.model.blocks = to_size(v); },
       [](const C& c) { return std::to_string(c.model.blocks); }, true},
      {"model.width", [](C& c, S v) { c.model.width = to_size(v); },
       [](const C& c) { return std::to_string(c.model.width); }, true},
      {"model.theta", [](C& c, S v) { c.model.theta = to_size(v); },
       [](const C& c) { return std::to_string(c.model.theta); }, true},
      {"model.kernels", [](C& c, S v) { c.model.kernels = to_list(v); },
       [](const C& c) { return fmt(c.model.kernels); }, true},
      {"model.knots", [](C& c, S v) { c.model.knots = to_list(v); },
       [](const C& c) { return fmt(c.model.knots); }, true},
      {"model.hidden", [](C& c, S v) { c.model.hidden = to_size(v); },
       [](const C& c) { return std::to_string(c.model.hidden); }, true},
      {"model.heads", [](C& c, S v) { c.model.heads = to_size(v); },
       [](const C& c) { return std::to_string(c.model.heads); }, true},
      {"model.dropout", [](C& c, S v) { c.model.dropout = to_double(v); },
       [](const C& c) { return fmt(c.model.dropout); }, true},
      {"target",
       [](C& c, S v) {
         if (v != "hr" && v != "mbp") throw Invalid{"expected hr or mbp, got '" + v + "'"};
         c.target = data::parse_channel(v);
       },
       [](const C& c) { return std::string(data::channel_name(c.target)); }, true},
      {"covariates", [](C& c, S v) { c.covariates = to_bool(v); },
       [](const C& c) { return std::string(c.covariates ? "true" : "false"); }, true},
      {"loss",
       [](C& c, S v) {
         if (v == "mse") c.loss = LossKind::kMse;
         else if (v == "dilate") c.loss = LossKind::kDilate;
         else throw Invalid{"expected mse or dilate, got '" + v + "'"};
       },
       [](const C& c) { return loss_name(c.loss); }},
      {"loss.alpha", [](C& c, S v) { c.dilate.alpha = to_double(v); },
       [](const C& c) { return fmt(c.dilate.alpha); }},
      {"loss.gamma", [](C& c, S v) { c.dilate.gamma = to_double(v); },
       [](const C& c) { return fmt(c.dilate.gamma); }},
      {"train.lr", [](C& c, S v) { c.train.lr = to_double(v); },
       [](const C& c) { return fmt(c.train.lr); }},
      {"train.batch_size", [](C& c, S v) { c.train.batch_size = to_size(v); },
       [](const C& c) { return std::to_string(c.train.batch_size); }},
      {"train.max_epochs", [](C& c, S v) { c.train.max_epochs = to_size(v); },
       [](const C& c) { return std::to_string(c.train.max_epochs); }},
      {"train.patience", [](C& c, S v) { c.train.patience = to_size(v); },
       [](const C& c) { return std::to_string(c.train.patience); }},
      {"train.max_steps", [](C& c, S v) { c.train.max_steps = to_size(v); },
       [](const C& c) { return std::to_string(c.train.max_steps); }},
      {"seed", [](C& c, S v) { c.seed = to_size(v); },
       [](const C& c) { return std::to_string(c.seed); }},
  };
  return table;
}

[[noreturn]] void reject(const std::string& key, const std::string& why) {
  throw ConfigError("key '" + key + "': " + why);
}

void validate(const ExperimentConfig& c) {
  if (c.data.source == DataSource::kCsv && (c.data.vitals.empty() || c.data.diagnoses.empty())) {
    reject(c.data.vitals.empty() ? "data.vitals" : "data.diagnoses", "required when data.source = csv");
  }
  if (c.data.source == DataSource::kSynthetic && c.data.patients < 3) reject("data.patients", "must be at least 3");
  if (c.data.samples < 1) reject("data.samples", "must be at least 1");
  if (c.data.deterioration < 0.0 || c.data.deterioration > 1.0) reject("data.deterioration", "must lie in [0, 1]");
  if (c.data.noise < 0.0) reject("data.noise", "must be non-negative");
  for (auto [key, v] : {std::pair{"model.stacks", c.model.stacks}, {"model.blocks", c.model.blocks},
                        {"model.width", c.model.width}, {"model.theta", c.model.theta},
                        {"model.hidden", c.model.hidden}, {"model.heads", c.model.heads},
                        {"train.batch_size", c.train.batch_size},
                        {"train.max_epochs", c.train.max_epochs},
                        {"train.patience", c.train.patience}}) {
    if (v == 0) reject(key, "must be positive");
  }
  if (c.model.kernels.size() != c.model.knots.size()) {
    reject("model.knots", "needs one entry per model.kernels entry");
  }
  for (auto k : c.model.kernels) {
    if (k == 0 || k > models::kInputSteps) reject("model.kernels", "entries must lie in [1, 72]");
  }
  for (auto m : c.model.knots) {
    if (m == 0 || m > models::kHorizon) reject("model.knots", "entries must lie in [1, 36]");
  }
  if (c.model.hidden % c.model.heads != 0) reject("model.heads", "must divide model.hidden");
  if (c.model.dropout < 0.0 || c.model.dropout >= 1.0) reject("model.dropout", "must lie in [0, 1)");
  if (c.dilate.alpha < 0.0 || c.dilate.alpha > 1.0) reject("loss.alpha", "must lie in [0, 1]");
  if (c.dilate.gamma <= 0.0) reject("loss.gamma", "must be positive");
  if (c.train.lr <= 0.0) reject("train.lr", "must be positive");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const auto body = trim(line.substr(0, hash));
    if (body.empty()) continue;
    const std::string where = source + ":" + std::to_string(number) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    const Field* field = nullptr;
    for (const auto& f : fields()) {
      if (key == f.key) field = &f;
    }
    if (field == nullptr) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "key '" + key + "' repeated");
    try {
      field->set(cfg, value);
    } catch (const Invalid& e) {
      throw ConfigError(where + "key '" + key + "': " + e.message);
    }
  }
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string to_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

void check_inputs(const ExperimentConfig& cfg) {
  if (cfg.data.source != DataSource::kCsv) return;
  for (const auto& [key, path] : {std::pair{"data.vitals", cfg.data.vitals},
                                  {"data.diagnoses", cfg.data.diagnoses}}) {
    if (!std::filesystem::is_regular_file(path)) {
      throw ConfigError(std::string("key '") + key + "': file not found: " + path.string());
    }
  }
}

std::vector<std::string> model_mismatches(const ExperimentConfig& a, const ExperimentConfig& b) {
  std::vector<std::string> out;
  for (const auto& f : fields()) {
    if (f.identity && f.get(a) != f.get(b)) out.emplace_back(f.key);
  }
  return out;
}

std::unique_ptr<models::ForecastModel> build_model(const ExperimentConfig& cfg) {
  const auto& m = cfg.model;
  if (m.kind == "persistence") return std::make_unique<models::PersistenceModel>(cfg.channels());
  if (m.kind == "nbeats") {
    return std::make_unique<models::NBeatsModel>(
        models::NBeatsConfig{m.stacks, m.blocks, m.width, m.theta, cfg.channels()}, cfg.seed);
  }
  if (m.kind == "nhits") {
    return std::make_unique<models::NHitsModel>(
        models::NHitsConfig{m.blocks, m.width, m.theta, cfg.channels(), m.kernels, m.knots},
        cfg.seed);
  }
  return std::make_unique<models::TftModel>(
      models::TftConfig{m.hidden, m.heads, m.dropout, cfg.channels()}, cfg.seed);
}

}  // namespace vitalcast::experiment
