#include "vitalcast/models/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vitalcast/error.hpp"
#include "vitalcast/io.hpp"

namespace vitalcast::models {

namespace {

constexpr const char* kMagic = "vitalcast-checkpoint";
constexpr int kVersion = 1;

std::string hexfloat(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

double parse_hexfloat(const std::string& token) {
  double v = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  bool negative = false;
  if (begin != end && *begin == '-') {
    negative = true;
    ++begin;
  }
  const auto res = std::from_chars(begin, end, v, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != end) {
    throw DataError("checkpoint: bad tensor value '" + token + "'");
  }
  return negative ? -v : v;
}

void expect_word(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) {
    throw DataError("checkpoint: expected '" + word + "', found '" + got + "'");
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << kMagic << ' ' << kVersion << '\n';
  std::vector<std::string> lines;
  std::istringstream cfg(ckpt.config_text);
  for (std::string line; std::getline(cfg, line);) lines.push_back(line);
  out << "config " << lines.size() << '\n';
  for (const auto& line : lines) out << line << '\n';
  out << "tensors " << ckpt.tensors.size() << '\n';
  for (const auto& [name, t] : ckpt.tensors) {
    out << "tensor " << name << ' ' << t.rank();
    for (auto d : t.shape()) out << ' ' << d;
    out << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
      out << (i ? " " : "") << hexfloat(t[i]);
    }
    out << '\n';
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  expect_word(in, kMagic);
  int version = 0;
  if (!(in >> version) || version != kVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  expect_word(in, "config");
  std::size_t n_lines = 0;
  in >> n_lines;
  std::string line;
  std::getline(in, line);
  for (std::size_t i = 0; i < n_lines; ++i) {
    if (!std::getline(in, line)) throw DataError("checkpoint: truncated config block");
    ckpt.config_text += line + '\n';
  }
  expect_word(in, "tensors");
  std::size_t count = 0;
  in >> count;
  for (std::size_t k = 0; k < count; ++k) {
    expect_word(in, "tensor");
    std::string name;
    std::size_t rank = 0;
    in >> name >> rank;
    Shape shape(rank);
    for (auto& d : shape) in >> d;
    if (!in) throw DataError("checkpoint: malformed header for tensor '" + name + "'");
    Tensor t(shape);
    std::string token;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!(in >> token)) throw DataError("checkpoint: truncated tensor '" + name + "'");
      t[i] = parse_hexfloat(token);
    }
    ckpt.tensors.emplace_back(std::move(name), std::move(t));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ostringstream out;
  write_checkpoint(out, ckpt);
  write_file_atomic(path, out.str());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

Checkpoint snapshot(const ForecastModel& model, std::string config_text) {
  Checkpoint ckpt;
  ckpt.config_text = std::move(config_text);
  for (const auto& p : model.parameters()) ckpt.tensors.emplace_back(p.name, p.value.value());
  return ckpt;
}

void restore_parameters(const ForecastModel& model, const Checkpoint& ckpt) {
  auto params = model.parameters();
  if (params.size() != ckpt.tensors.size()) {
    throw ContractError("checkpoint holds " + std::to_string(ckpt.tensors.size()) +
                        " tensors but the model has " + std::to_string(params.size()) +
                        " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, t] = ckpt.tensors[i];
    if (name != params[i].name || t.shape() != params[i].value.shape()) {
      throw ContractError("checkpoint tensor '" + name + "' " + shape_to_string(t.shape()) +
                          " does not match model parameter '" + params[i].name + "' " +
                          shape_to_string(params[i].value.shape()));
    }
    params[i].value.mutable_value() = t;
  }
}

}  // namespace vitalcast::models
