#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vitalcast::data {

enum class Channel { kHr = 0, kMbp = 1, kRr = 2 };

inline constexpr std::size_t kChannelCount = 3;

std::string_view channel_name(Channel c);
/// Accepts "hr", "mbp" or "rr". Throws ParameterError otherwise.
Channel parse_channel(std::string_view name);

struct RawVitalRecord {
  std::string patient_id;
  std::int64_t offset_min = 0;
  std::optional<double> hr;
  std::optional<double> sbp;
  std::optional<double> dbp;
  std::optional<double> rr;
};

enum class DiagnosisLabel { kSepsis, kSepticShock };

struct DiagnosisRecord {
  std::string patient_id;
  std::string group_id;
  std::int64_t diagnosis_offset_min = 0;
  DiagnosisLabel label = DiagnosisLabel::kSepsis;
};

inline constexpr std::string_view kVitalsHeader = "patient_id,offset_min,hr,sbp,dbp,rr";
inline constexpr std::string_view kDiagnosisHeader =
    "patient_id,group_id,diagnosis_offset_min,label";

/// Parses a vitals CSV and sorts rows by (patient_id, offset_min). Empty cells
/// are missing. Throws SchemaError on a bad header and DataError naming the
/// line for unparseable cells or repeated offsets.
std::vector<RawVitalRecord> ingest_csv(const std::filesystem::path& path);
std::vector<RawVitalRecord> ingest_csv(std::istream& in, const std::string& source);

std::vector<DiagnosisRecord> ingest_diagnoses(const std::filesystem::path& path);
std::vector<DiagnosisRecord> ingest_diagnoses(std::istream& in, const std::string& source);

std::string format_vitals_csv(const std::vector<RawVitalRecord>& records);
std::string format_diagnosis_csv(const std::vector<DiagnosisRecord>& records);

}  // namespace vitalcast::data
