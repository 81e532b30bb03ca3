#include "nvkerr/dataset_io.hpp"

#include <array>
#include <charconv>
#include <sstream>
#include <vector>

#include "nvkerr/error.hpp"

namespace nvkerr {

FileFormat file_format_from_string(std::string_view name) {
  if (name == "csv") return FileFormat::csv;
  if (name == "json") return FileFormat::json;
  throw DomainError("unknown format '" + std::string(name) + "' (expected csv or json)");
}

std::string_view to_string(FileFormat format) { return format == FileFormat::csv ? "csv" : "json"; }

std::string format_number(double value) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
  return {buf.data(), end};
}

std::string metadata_line(const json& metadata) { return "# " + metadata.dump() + "\n"; }

json to_json(const HarmonicCoefficients& c) { return {{"C", c.c}, {"L", c.l}, {"F", c.f}, {"D", c.d}}; }

json to_json(const FluenceLaw& law) {
  return {{"law", std::string(to_string(law.kind))}, {"coefficient", law.coefficient}};
}

json to_json(const TimeTraceModel& model) {
  json out = {{"peak_deg", model.peak}, {"t0_ps", model.t0}, {"cross_correlation_fwhm_ps", model.cross_correlation_fwhm}};
  out["decay_tau_ps"] = model.decay_tau ? json(*model.decay_tau) : json(nullptr);
  return out;
}

namespace {

using Row = std::array<double, 3>;

json dataset_header(std::string_view kind, const json& fields, const json& metadata) {
  json head = {{"schema_version", kSchemaVersion}, {"kind", std::string(kind)}};
  for (const auto& [k, v] : fields.items()) head[k] = v;
  for (const auto& [k, v] : metadata.items()) {
    if (!head.contains(k)) head[k] = v;
  }
  return head;
}

std::string write_rows(std::string_view kind, std::string_view header, const json& fields, const json& metadata,
                       const std::vector<Row>& rows, const std::array<const char*, 3>& keys, const char* rows_key,
                       FileFormat format) {
  if (format == FileFormat::csv) {
    std::string out = metadata_line(dataset_header(kind, fields, metadata));
    out += header;
    out += '\n';
    for (const Row& r : rows) {
      out += format_number(r[0]) + ',' + format_number(r[1]) + ',' + format_number(r[2]) + '\n';
    }
    return out;
  }
  json doc = {{"schema_version", kSchemaVersion}, {"kind", std::string(kind)}};
  for (const auto& [k, v] : fields.items()) doc[k] = v;
  doc["metadata"] = metadata;
  json arr = json::array();
  for (const Row& r : rows) arr.push_back({{keys[0], r[0]}, {keys[1], r[1]}, {keys[2], r[2]}});
  doc[rows_key] = std::move(arr);
  return doc.dump(2) + "\n";
}

bool looks_like_json(std::string_view text) {
  for (char ch : text) {
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') continue;
    return ch == '{';
  }
  return false;
}

double parse_field(std::string_view field, std::size_t line_no) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(field) + "'");
  }
  return value;
}

struct CsvContent {
  json metadata = json::object();
  std::vector<Row> rows;
};

CsvContent parse_csv(std::string_view text, std::string_view expected_header) {
  CsvContent out;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (line.front() == '#') {
      if (header_seen) throw ParseError("line " + std::to_string(line_no) + ": metadata after the header row");
      std::string_view body = line.substr(1);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      if (!body.empty() && body.front() == '{') {
        json parsed = json::parse(body, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) {
          throw ParseError("line " + std::to_string(line_no) + ": metadata is not a JSON object");
        }
        for (auto& [k, v] : parsed.items()) out.metadata[k] = v;
      }
      continue;
    }
    if (!header_seen) {
      if (line != expected_header) {
        throw ParseError("line " + std::to_string(line_no) + ": expected header '" + std::string(expected_header) +
                         "', found '" + std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    Row row{};
    std::size_t col = 0;
    std::string_view rest = line;
    while (true) {
      const std::size_t comma = rest.find(',');
      if (col >= 3) throw ParseError("line " + std::to_string(line_no) + ": expected 3 columns");
      row[col++] = parse_field(rest.substr(0, comma), line_no);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (col != 3) throw ParseError("line " + std::to_string(line_no) + ": expected 3 columns, found " + std::to_string(col));
    if (!(row[2] >= 0.0)) throw ParseError("line " + std::to_string(line_no) + ": sigma must be >= 0");
    out.rows.push_back(row);
  }
  if (!header_seen) throw ParseError("missing header row '" + std::string(expected_header) + "'");
  return out;
}

struct JsonContent {
  json doc;
  json metadata = json::object();
  std::vector<Row> rows;
};

JsonContent parse_json(std::string_view text, std::string_view kind, const char* rows_key,
                       const std::array<const char*, 3>& keys) {
  JsonContent out;
  out.doc = json::parse(text, nullptr, false);
  if (out.doc.is_discarded() || !out.doc.is_object()) throw ParseError("dataset is not a valid JSON object");
  try {
    if (out.doc.value("kind", std::string(kind)) != kind) {
      throw ParseError("dataset kind is '" + out.doc["kind"].get<std::string>() + "', expected '" + std::string(kind) + "'");
    }
    if (out.doc.contains("metadata")) out.metadata = out.doc["metadata"];
    if (!out.doc.contains(rows_key)) throw ParseError(std::string("dataset is missing key '") + rows_key + "'");
    std::size_t index = 0;
    for (const auto& item : out.doc[rows_key]) {
      Row row{};
      for (std::size_t k = 0; k < 3; ++k) {
        if (!item.contains(keys[k])) {
          throw ParseError(std::string(rows_key) + "[" + std::to_string(index) + "]: missing '" + keys[k] + "'");
        }
        row[k] = item[keys[k]].get<double>();
      }
      out.rows.push_back(row);
      ++index;
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset JSON: ") + e.what());
  }
  return out;
}

template <typename T>
T meta_value(const json& meta, const char* key, T fallback) {
  try {
    return meta.contains(key) ? meta[key].get<T>() : fallback;
  } catch (const json::exception& e) {
    throw ParseError(std::string("metadata key '") + key + "': " + e.what());
  }
}

}  // namespace

std::string write_helicity_scan(const HelicityScan& scan, const json& metadata, FileFormat format) {
  std::vector<Row> rows;
  for (const auto& p : scan.points) rows.push_back({p.alpha_deg, p.delta_theta_deg, p.sigma_deg});
  return write_rows("helicity_scan", kHelicityHeader, {{"fluence_mj_cm2", scan.fluence}}, metadata, rows,
                    {"alpha_deg", "delta_theta_deg", "sigma_deg"}, "points", format);
}

std::string write_fluence_series(const FluenceSeries& series, const json& metadata, FileFormat format) {
  std::vector<Row> rows;
  for (const auto& e : series.entries) rows.push_back({e.fluence, e.value, e.sigma});
  const json fields = {{"coefficient_label", std::string(1, series.coefficient_label)},
                       {"generating_law", to_json(series.generating_law)}};
  return write_rows("fluence_series", kFluenceHeader, fields, metadata, rows,
                    {"fluence_mj_cm2", "value_deg", "sigma_deg"}, "entries", format);
}

std::string write_time_trace(const TimeTrace& trace, const json& metadata, FileFormat format) {
  std::vector<Row> rows;
  for (const auto& p : trace.points) rows.push_back({p.delay_ps, p.delta_theta_deg, p.sigma_deg});
  return write_rows("time_trace", kTraceHeader, {{"model", to_json(trace.model)}}, metadata, rows,
                    {"delay_ps", "delta_theta_deg", "sigma_deg"}, "points", format);
}

Loaded<HelicityScan> read_helicity_scan(std::string_view text) {
  Loaded<HelicityScan> out;
  std::vector<Row> rows;
  constexpr std::array<const char*, 3> keys = {"alpha_deg", "delta_theta_deg", "sigma_deg"};
  if (looks_like_json(text)) {
    JsonContent c = parse_json(text, "helicity_scan", "points", keys);
    out.metadata = std::move(c.metadata);
    out.data.fluence = meta_value(c.doc, "fluence_mj_cm2", 29.0);
    rows = std::move(c.rows);
  } else {
    CsvContent c = parse_csv(text, kHelicityHeader);
    out.metadata = std::move(c.metadata);
    out.data.fluence = meta_value(out.metadata, "fluence_mj_cm2", 29.0);
    rows = std::move(c.rows);
  }
  for (const Row& r : rows) out.data.points.push_back({r[0], r[1], r[2]});
  try {
    out.data.validate();
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
  return out;
}

Loaded<FluenceSeries> read_fluence_series(std::string_view text) {
  Loaded<FluenceSeries> out;
  std::vector<Row> rows;
  const json* fields = nullptr;
  JsonContent jc;
  constexpr std::array<const char*, 3> keys = {"fluence_mj_cm2", "value_deg", "sigma_deg"};
  if (looks_like_json(text)) {
    jc = parse_json(text, "fluence_series", "entries", keys);
    out.metadata = jc.metadata;
    rows = std::move(jc.rows);
    fields = &jc.doc;
  } else {
    CsvContent c = parse_csv(text, kFluenceHeader);
    out.metadata = std::move(c.metadata);
    rows = std::move(c.rows);
    fields = &out.metadata;
  }
  const std::string label = meta_value<std::string>(*fields, "coefficient_label", "F");
  if (label.size() != 1) throw ParseError("coefficient_label must be a single letter");
  out.data.coefficient_label = label[0];
  if (fields->contains("generating_law") && (*fields)["generating_law"].is_object()) {
    const json& law = (*fields)["generating_law"];
    try {
      out.data.generating_law.kind = scaling_law_from_string(meta_value<std::string>(law, "law", "linear"));
    } catch (const DomainError& e) {
      throw ParseError(e.what());
    }
    out.data.generating_law.coefficient = meta_value(law, "coefficient", 0.0);
  }
  for (const Row& r : rows) out.data.entries.push_back({r[0], r[1], r[2]});
  try {
    out.data.validate();
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
  return out;
}

Loaded<TimeTrace> read_time_trace(std::string_view text) {
  Loaded<TimeTrace> out;
  std::vector<Row> rows;
  json model;
  constexpr std::array<const char*, 3> keys = {"delay_ps", "delta_theta_deg", "sigma_deg"};
  if (looks_like_json(text)) {
    JsonContent c = parse_json(text, "time_trace", "points", keys);
    out.metadata = std::move(c.metadata);
    model = c.doc.value("model", json::object());
    rows = std::move(c.rows);
  } else {
    CsvContent c = parse_csv(text, kTraceHeader);
    out.metadata = std::move(c.metadata);
    model = out.metadata.value("model", json::object());
    rows = std::move(c.rows);
  }
  out.data.model.peak = meta_value(model, "peak_deg", 0.0);
  out.data.model.t0 = meta_value(model, "t0_ps", 0.0);
  out.data.model.cross_correlation_fwhm = meta_value(model, "cross_correlation_fwhm_ps", 0.0);
  if (model.contains("decay_tau_ps") && model["decay_tau_ps"].is_number()) {
    out.data.model.decay_tau = model["decay_tau_ps"].get<double>();
  }
  double previous = -std::numeric_limits<double>::infinity();
  for (const Row& r : rows) {
    if (!(r[0] >= previous)) throw ParseError("time trace delays must be ascending");
    previous = r[0];
    out.data.points.push_back({r[0], r[1], r[2]});
  }
  return out;
}

}  // namespace nvkerr
