#include "vitalcast/data/vitals.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "vitalcast/error.hpp"

namespace vitalcast::data {

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::kHr: return "hr";
    case Channel::kMbp: return "mbp";
    case Channel::kRr: return "rr";
  }
  return "?";
}

Channel parse_channel(std::string_view name) {
  if (name == "hr") return Channel::kHr;
  if (name == "mbp") return Channel::kMbp;
  if (name == "rr") return Channel::kRr;
  throw ParameterError("unknown channel '" + std::string(name) + "' (expected hr, mbp or rr)");
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

struct LineError {
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(source + ":" + std::to_string(line) + ": " + what);
  }
};

std::optional<double> parse_optional(std::string_view cell, std::string_view column,
                                     const LineError& err) {
  cell = trim(cell);
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    err.fail("column '" + std::string(column) + "': non-numeric value '" + std::string(cell) +
             "'");
  }
  return v;
}

std::int64_t parse_int(std::string_view cell, std::string_view column, const LineError& err) {
  cell = trim(cell);
  std::int64_t v = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    err.fail("column '" + std::string(column) + "': expected integer minutes, got '" +
             std::string(cell) + "'");
  }
  return v;
}

// Reads the header and hands each non-blank data row to `row`.
template <typename RowFn>
void read_csv(std::istream& in, const std::string& source, std::string_view header,
              RowFn&& row) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != header) {
    throw SchemaError(source + ": expected header '" + std::string(header) + "'");
  }
  const std::size_t columns = split_fields(header).size();
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(trim(line));
    const LineError err{source, number};
    if (fields.size() != columns) {
      err.fail("expected " + std::to_string(columns) + " fields, got " +
               std::to_string(fields.size()));
    }
    row(fields, err);
  }
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

void append_number(std::string& out, std::optional<double> v) {
  if (!v) return;
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, *v);
  out.append(buf, res.ptr);
}

}  // namespace

std::vector<RawVitalRecord> ingest_csv(std::istream& in, const std::string& source) {
  std::vector<RawVitalRecord> records;
  std::vector<std::size_t> lines;
  read_csv(in, source, kVitalsHeader, [&](const auto& f, const LineError& err) {
    const auto id = trim(f[0]);
    if (id.empty()) err.fail("empty patient_id");
    records.push_back({std::string(id), parse_int(f[1], "offset_min", err),
                       parse_optional(f[2], "hr", err), parse_optional(f[3], "sbp", err),
                       parse_optional(f[4], "dbp", err), parse_optional(f[5], "rr", err)});
    lines.push_back(err.line);
  });

  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = records[a];
    const auto& rb = records[b];
    return std::tie(ra.patient_id, ra.offset_min) < std::tie(rb.patient_id, rb.offset_min);
  });
  std::vector<RawVitalRecord> sorted;
  sorted.reserve(records.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& r = records[order[k]];
    if (!sorted.empty() && sorted.back().patient_id == r.patient_id &&
        sorted.back().offset_min == r.offset_min) {
      LineError{source, lines[order[k]]}.fail("duplicate offset " +
                                              std::to_string(r.offset_min) + " for patient " +
                                              r.patient_id);
    }
    sorted.push_back(r);
  }
  return sorted;
}

std::vector<RawVitalRecord> ingest_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return ingest_csv(in, path.string());
}

std::vector<DiagnosisRecord> ingest_diagnoses(std::istream& in, const std::string& source) {
  std::vector<DiagnosisRecord> out;
  read_csv(in, source, kDiagnosisHeader, [&](const auto& f, const LineError& err) {
    DiagnosisRecord d;
    d.patient_id = std::string(trim(f[0]));
    d.group_id = std::string(trim(f[1]));
    if (d.patient_id.empty() || d.group_id.empty()) err.fail("empty identifier");
    d.diagnosis_offset_min = parse_int(f[2], "diagnosis_offset_min", err);
    const auto label = trim(f[3]);
    if (label == "sepsis") {
      d.label = DiagnosisLabel::kSepsis;
    } else if (label == "septic_shock") {
      d.label = DiagnosisLabel::kSepticShock;
    } else {
      err.fail("label must be sepsis or septic_shock, got '" + std::string(label) + "'");
    }
    out.push_back(std::move(d));
  });
  return out;
}

std::vector<DiagnosisRecord> ingest_diagnoses(const std::filesystem::path& path) {
  auto in = open(path);
  return ingest_diagnoses(in, path.string());
}

std::string format_vitals_csv(const std::vector<RawVitalRecord>& records) {
  std::string out(kVitalsHeader);
  out += '\n';
  for (const auto& r : records) {
    out += r.patient_id;
    out += ',';
    out += std::to_string(r.offset_min);
    for (const auto& v : {r.hr, r.sbp, r.dbp, r.rr}) {
      out += ',';
      append_number(out, v);
    }
    out += '\n';
  }
  return out;
}

std::string format_diagnosis_csv(const std::vector<DiagnosisRecord>& records) {
  std::string out(kDiagnosisHeader);
  out += '\n';
  for (const auto& d : records) {
    out += d.patient_id + ',' + d.group_id + ',' + std::to_string(d.diagnosis_offset_min) + ',' +
           (d.label == DiagnosisLabel::kSepsis ? "sepsis" : "septic_shock") + '\n';
  }
  return out;
}

}  // namespace vitalcast::data
