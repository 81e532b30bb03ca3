/**
 * @file dataset_io.hpp
 * @brief On-disk dataset formats.
 *
 * CSV files carry `#`-prefixed metadata lines above a fixed header. A metadata
 * line holding a JSON object is merged into the dataset's metadata; any other
 * comment line (for example the `# generated_at:` timestamp) is ignored.
 *
 *   # {"schema_version":1,"kind":"helicity_scan",...}
 *   alpha_deg,delta_theta_deg,sigma_deg
 *   0,1.0e-4,5e-05
 *
 * JSON files hold one object with `schema_version`, `kind`, `metadata` and
 * the rows under a kind-specific key. Numbers are written in shortest
 * round-trip form so a parsed dataset is bit-identical to the written one.
 */

#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "nvkerr/synthesis.hpp"

namespace nvkerr {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum class FileFormat { csv, json };
FileFormat file_format_from_string(std::string_view name);
std::string_view to_string(FileFormat format);

inline constexpr std::string_view kHelicityHeader = "alpha_deg,delta_theta_deg,sigma_deg";
inline constexpr std::string_view kFluenceHeader = "fluence_mj_cm2,value_deg,sigma_deg";
inline constexpr std::string_view kTraceHeader = "delay_ps,delta_theta_deg,sigma_deg";

/// Shortest decimal string that parses back to exactly `value`.
std::string format_number(double value);

/// `# ` + compact JSON, one line.
std::string metadata_line(const json& metadata);

template <typename Dataset>
struct Loaded {
  Dataset data;
  json metadata = json::object();
};

std::string write_helicity_scan(const HelicityScan& scan, const json& metadata, FileFormat format);
std::string write_fluence_series(const FluenceSeries& series, const json& metadata, FileFormat format);
std::string write_time_trace(const TimeTrace& trace, const json& metadata, FileFormat format);

/// Parsers detect CSV vs JSON from the first non-blank character. Malformed
/// input raises ParseError naming the offending line (CSV) or key (JSON).
Loaded<HelicityScan> read_helicity_scan(std::string_view text);
Loaded<FluenceSeries> read_fluence_series(std::string_view text);
Loaded<TimeTrace> read_time_trace(std::string_view text);

/// JSON encodings used inside metadata and reports.
json to_json(const HarmonicCoefficients& c);
json to_json(const FluenceLaw& law);
json to_json(const TimeTraceModel& model);

}  // namespace nvkerr
