#include "nvkerr/cli.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "nvkerr/analysis.hpp"
#include "nvkerr/dataset_io.hpp"
#include "nvkerr/error.hpp"
#include "nvkerr/geometry.hpp"
#include "nvkerr/magnetometry.hpp"
#include "nvkerr/synthesis.hpp"

namespace nvkerr::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Parameter schema shared by flags, --config files and the config echo.

enum class Kind { number, integer, text, vector3, flag };

struct Param {
  std::string key;   ///< config key; the flag is --key
  Kind kind;
  json fallback;     ///< null: no default
  bool required;
  std::string help;
};

struct Command {
  std::string path;  ///< "synth helicity", "fit", ...
  std::vector<Param> params;
  std::string default_format;
  std::string summary;
};

const Param kSeed{"seed", Kind::integer, 0, false, "random seed (u64)"};

std::vector<Command> command_table() {
  const MaterialParams material;
  return {
      {"synth helicity",
       {{"C", Kind::number, nullptr, true, "sin2a amplitude (deg)"},
        {"L", Kind::number, nullptr, true, "sin4a amplitude (deg)"},
        {"F", Kind::number, nullptr, true, "sin6a amplitude (deg)"},
        {"D", Kind::number, nullptr, true, "offset (deg)"},
        {"sigma", Kind::number, material.theta_sensitivity, false, "noise sigma (deg)"},
        {"fluence", Kind::number, 29.0, false, "pump fluence (mJ/cm^2)"},
        {"grid-points", Kind::integer, 24, false, "uniform QWP angles over [0, 180)"},
        kSeed},
       "csv", "Helicity scan over QWP angles"},
      {"synth fluence",
       {{"law", Kind::text, nullptr, true, "linear | quadratic"},
        {"a", Kind::number, nullptr, false, "linear coefficient (deg cm^2/mJ)"},
        {"b", Kind::number, nullptr, false, "quadratic coefficient (deg cm^4/mJ^2)"},
        {"label", Kind::text, nullptr, false, "coefficient label C | L | F"},
        {"from", Kind::number, 8.0, false, "first fluence (mJ/cm^2)"},
        {"to", Kind::number, 40.0, false, "last fluence (mJ/cm^2)"},
        {"points", Kind::integer, 9, false, "number of fluences"},
        {"range-min", Kind::number, 8.0, false, "smallest accepted fluence"},
        {"range-max", Kind::number, 40.0, false, "largest accepted fluence"},
        {"sigma", Kind::number, material.theta_sensitivity, false, "noise sigma (deg)"},
        kSeed},
       "csv", "Fluence series from a linear or quadratic law"},
      {"synth trace",
       {{"peak", Kind::number, nullptr, true, "peak rotation (deg)"},
        {"t0", Kind::number, 0.0, false, "delay origin (ps)"},
        {"pulse-fs", Kind::number, material.pulse_fwhm_fs, false, "pump pulse FWHM (fs)"},
        {"fwhm-ps", Kind::number, nullptr, false, "cross-correlation FWHM (ps); default sqrt(2) x pulse"},
        {"decay-tau", Kind::number, nullptr, false, "exponential tail after t0 (ps)"},
        {"from", Kind::number, -1.0, false, "first delay (ps)"},
        {"to", Kind::number, 2.0, false, "last delay (ps)"},
        {"step", Kind::number, 0.01, false, "delay step (ps)"},
        {"sigma", Kind::number, material.theta_sensitivity, false, "noise sigma (deg)"},
        kSeed},
       "csv", "Pump-probe delay trace"},
      {"fit", {{"input", Kind::text, nullptr, true, "helicity scan (csv or json)"}}, "json", "Harmonic fits of a helicity scan (direct, two-stage, three-term)"},
      {"fluence",
       {{"input", Kind::text, nullptr, true, "fluence series (csv or json)"},
        {"intercept", Kind::flag, false, false, "fit an intercept as well"}},
       "json", "Linear vs quadratic fluence scaling fit"},
      {"geometry",
       {{"incidence", Kind::number, 20.0, false, "pump incidence angle (deg)"},
        {"n-inside", Kind::number, material.n, false, "refractive index of the crystal"},
        {"n-outside", Kind::number, 1.0, false, "refractive index of the ambient"},
        {"field", Kind::vector3, json::array({1.0, 0.0, 0.0}), false, "field direction x,y,z"}},
       "json", "Pump refraction and NV-axis projections"},
      {"estimate",
       {{"theta-icme", Kind::number, 8.0e-4, false, "sin6a rotation (deg)"},
        {"m", Kind::number, 1.0, false, "magnetization driving the ICME (T)"},
        {"n", Kind::number, material.n, false, "refractive index"},
        {"chi2", Kind::number, material.chi2_mo, false, "chi' for the detection limit (deg/T^2)"},
        {"floor", Kind::number, material.theta_sensitivity, false, "rotation noise floor (deg)"},
        {"theta-ife", Kind::number, 1.9e-3, false, "sin2a rotation to convert (deg)"},
        {"ref-deg", Kind::number, 1.9e-3, false, "IFE calibration rotation (deg)"},
        {"ref-tesla", Kind::number, 1.0, false, "IFE calibration field (T)"},
        {"quoted-limit", Kind::number, 35e-3, false, "quoted detection limit for comparison (T)"}},
       "json", "Susceptibility and detection-limit estimates"},
      {"report",
       {{"C", Kind::number, 1.9e-3, false, "sin2a amplitude at the scan fluence (deg)"},
        {"L", Kind::number, 5.0e-4, false, "sin4a amplitude at the scan fluence (deg)"},
        {"F", Kind::number, 8.0e-4, false, "sin6a amplitude at the scan fluence (deg)"},
        {"D", Kind::number, 1.0e-4, false, "offset (deg)"},
        {"fluence", Kind::number, 29.0, false, "helicity-scan fluence (mJ/cm^2)"},
        {"scan-sigma", Kind::number, 5.0e-5, false, "helicity-scan noise (deg)"},
        {"from", Kind::number, 8.0, false, "first series fluence"},
        {"to", Kind::number, 40.0, false, "last series fluence"},
        {"points", Kind::integer, 9, false, "series length"},
        {"noise-fraction", Kind::number, 0.1, false, "series sigma as a fraction of its largest value"},
        {"incidence", Kind::number, 20.0, false, "pump incidence angle (deg)"},
        {"n", Kind::number, material.n, false, "refractive index"},
        kSeed},
       "json", "Figure-reproduction report from synthetic data"},
  };
}

// ---------------------------------------------------------------------------
// Value conversion

double parse_double(const std::string& text, const std::string& key) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw UsageError("--" + key + ": '" + text + "' is not a number");
  }
  return value;
}

json convert_flag(const Param& p, const std::string& text) {
  switch (p.kind) {
    case Kind::number:
      return parse_double(text, p.key);
    case Kind::integer: {
      std::uint64_t value = 0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw UsageError("--" + p.key + ": '" + text + "' is not a non-negative integer");
      }
      return value;
    }
    case Kind::text:
      return text;
    case Kind::vector3: {
      json arr = json::array();
      std::stringstream ss(text);
      std::string part;
      while (std::getline(ss, part, ',')) arr.push_back(parse_double(part, p.key));
      if (arr.size() != 3) throw UsageError("--" + p.key + ": expected three comma-separated numbers");
      return arr;
    }
    case Kind::flag:
      return true;
  }
  return nullptr;
}

void check_config_value(const Param& p, const json& v) {
  const bool ok = [&] {
    switch (p.kind) {
      case Kind::number:
        return v.is_number();
      case Kind::integer:
        return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
      case Kind::text:
        return v.is_string();
      case Kind::vector3:
        return v.is_array() && v.size() == 3 && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
      case Kind::flag:
        return v.is_boolean();
    }
    return false;
  }();
  if (!ok) throw UsageError("config key '" + p.key + "' has the wrong type");
}

/// Resolved parameter set: defaults, then flags, then --config overrides.
class Params {
 public:
  explicit Params(json values) : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.contains(key) && !values_[key].is_null(); }
  double number(const std::string& key) const { return values_.at(key).get<double>(); }
  std::uint64_t integer(const std::string& key) const { return values_.at(key).get<std::uint64_t>(); }
  std::string text(const std::string& key) const { return values_.at(key).get<std::string>(); }
  bool flag(const std::string& key) const { return has(key) && values_.at(key).get<bool>(); }
  Vec3 vector3(const std::string& key) const {
    const json& v = values_.at(key);
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }
  const json& echo() const { return values_; }

 private:
  json values_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Output framing: timestamp and reproducibility hash.

std::string finalize_csv(const std::string& body, const Environment& env) {
  std::string out = "# generated_at: " + env.timestamp() + "\n";
  out += "# reproducibility_hash: fnv1a64:" + fnv1a64_hex(body) + "\n";
  return out + body;
}

std::string finalize_json(json doc, const Environment& env) {
  const std::string hash = fnv1a64_hex(doc.dump(2));
  doc["generated_at"] = env.timestamp();
  doc["reproducibility_hash"] = "fnv1a64:" + hash;
  return doc.dump(2) + "\n";
}

std::string finalize_dataset(const std::string& body, FileFormat format, const Environment& env) {
  if (format == FileFormat::csv) return finalize_csv(body, env);
  return finalize_json(json::parse(body), env);
}

json provenance(const std::string& command, const Params& params) {
  json cfg = json::object();
  cfg["command"] = command;
  for (const auto& [k, v] : params.echo().items()) cfg[k] = v;
  return cfg;
}

void merge_into(json& dst, const json& src) {
  for (const auto& [k, v] : src.items()) dst[k] = v;
}

json with_kind(std::string_view kind, const std::string& command, const Params& params) {
  return {{"schema_version", kSchemaVersion}, {"kind", std::string(kind)}, {"config", provenance(command, params)}};
}

// Rows of a CSV report: a metadata line with the summary, then a table.
std::string csv_report(const json& summary, const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& rows) {
  std::string out = metadata_line(summary);
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
    out += '\n';
  }
  return out;
}

std::string csv_key_values(const json& summary, const std::vector<std::pair<std::string, double>>& rows) {
  std::string out = metadata_line(summary);
  out += "quantity,value\n";
  for (const auto& [k, v] : rows) out += k + "," + format_number(v) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Report encodings

json harmonic_report_json(const HarmonicFitReport& r) {
  json cov = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int j = 0; j < 4; ++j) row.push_back(r.covariance(i, j));
    cov.push_back(row);
  }
  return {{"method", std::string(to_string(r.method))},
          {"includes_sin6", r.includes_sin6},
          {"coefficients", to_json(r.coeffs)},
          {"sigmas", {{"C", r.sigma(kIndexC)}, {"L", r.sigma(kIndexL)}, {"F", r.sigma(kIndexF)}, {"D", r.sigma(kIndexD)}}},
          {"covariance_order", {"C", "L", "F", "D"}},
          {"covariance", cov},
          {"residual_rms_deg", r.residual_rms},
          {"reduced_chi_square", r.reduced_chi_square},
          {"weighted", r.weighted},
          {"orthogonal_sampling", r.orthogonal_sampling},
          {"points", r.points}};
}

json scaling_report_json(const ScalingFitReport& r) {
  json per_law = json::object();
  for (const auto& [law, fit] : r.per_law) {
    json entry = {{"coefficient", fit.coefficient},
                  {"coefficient_sigma", fit.coefficient_sigma},
                  {"reduced_chi_square", fit.reduced_chi_square}};
    if (fit.intercept) {
      entry["intercept"] = *fit.intercept;
      entry["intercept_sigma"] = *fit.intercept_sigma;
    }
    per_law[std::string(to_string(law))] = entry;
  }
  return {{"selected", std::string(to_string(r.selected))},
          {"coefficient", r.coefficient},
          {"coefficient_sigma", r.coefficient_sigma},
          {"per_law", per_law}};
}

struct FitTables {
  HarmonicFitReport eq3, two_stage, extended;
  std::vector<std::vector<double>> rows;
};

const std::vector<std::string> kResidualColumns = {"alpha_deg",       "delta_theta_deg",   "sigma_deg",
                                                   "eq3_model_deg",   "eq3_residual_deg",  "sin6_fit_deg",
                                                   "extended_model_deg"};

FitTables fit_all(const HelicityScan& scan) {
  FitTables t{fit_eq3(scan), fit_two_stage(scan), fit_extended(scan), {}};
  for (const auto& p : scan.points) {
    const WavePlateSetting a(p.alpha_deg);
    const double base = t.eq3.model(a);
    t.rows.push_back({p.alpha_deg, p.delta_theta_deg, p.sigma_deg, base, p.delta_theta_deg - base,
                      t.two_stage.coeffs.f * std::sin(6 * a.radians()), t.extended.model(a)});
  }
  return t;
}

json fit_summary(const FitTables& t) {
  return {{"eq3", harmonic_report_json(t.eq3)},
          {"two_stage", harmonic_report_json(t.two_stage)},
          {"extended", harmonic_report_json(t.extended)},
          {"two_stage_minus_direct_F", t.two_stage.coeffs.f - t.extended.coeffs.f},
          {"orthogonal_sampling", t.extended.orthogonal_sampling}};
}

json rows_json(const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows) {
  json arr = json::array();
  for (const auto& row : rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = row[i];
    arr.push_back(obj);
  }
  return arr;
}

const std::vector<std::string> kScalingColumns = {"fluence_mj_cm2", "value_deg", "sigma_deg", "linear_model_deg",
                                                  "quadratic_model_deg"};

std::vector<std::vector<double>> scaling_rows(const FluenceSeries& s, const ScalingFitReport& r) {
  std::vector<std::vector<double>> rows;
  const LawFit& lin = r.per_law.at(ScalingLaw::linear);
  const LawFit& quad = r.per_law.at(ScalingLaw::quadratic);
  for (const auto& e : s.entries) {
    rows.push_back({e.fluence, e.value, e.sigma, lin.coefficient * e.fluence + lin.intercept.value_or(0.0),
                    quad.coefficient * e.fluence * e.fluence + quad.intercept.value_or(0.0)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Commands. Each returns the output body (before timestamp and hash framing).

std::string cmd_synth_helicity(const Params& p, FileFormat format, const Environment& env) {
  const HarmonicCoefficients coeffs{p.number("C"), p.number("L"), p.number("F"), p.number("D")};
  const std::uint64_t n = p.integer("grid-points");
  if (n == 0) throw DomainError("grid-points must be > 0");
  const NoiseSpec noise{p.number("sigma"), p.integer("seed")};
  const HelicityScan scan = synth_helicity_scan(coeffs, uniform_alpha_grid(n), noise, p.number("fluence"));
  const json meta = {{"config", provenance("synth helicity", p)},
                     {"generator", std::string(kGeneratorName)},
                     {"seed", noise.seed},
                     {"model", to_json(coeffs)}};
  return finalize_dataset(write_helicity_scan(scan, meta, format), format, env);
}

std::string cmd_synth_fluence(const Params& p, FileFormat format, const Environment& env) {
  FluenceLaw law;
  law.kind = scaling_law_from_string(p.text("law"));
  const char* coef_key = law.kind == ScalingLaw::linear ? "a" : "b";
  if (!p.has(coef_key)) throw UsageError(std::string("--") + coef_key + " is required for --law " + p.text("law"));
  law.coefficient = p.number(coef_key);
  std::string label = p.has("label") ? p.text("label") : (law.kind == ScalingLaw::linear ? "C" : "F");
  if (label.size() != 1) throw DomainError("--label must be one of C, L, F");
  const std::uint64_t points = p.integer("points");
  if (points == 0) throw DomainError("--points must be > 0");
  const NoiseSpec noise{p.number("sigma"), p.integer("seed")};
  const FluenceSeries series =
      synth_fluence_series(law, fluence_grid(p.number("from"), p.number("to"), points), noise, label[0],
                           {p.number("range-min"), p.number("range-max")});
  const json meta = {{"config", provenance("synth fluence", p)},
                     {"generator", std::string(kGeneratorName)},
                     {"seed", noise.seed}};
  return finalize_dataset(write_fluence_series(series, meta, format), format, env);
}

std::string cmd_synth_trace(const Params& p, FileFormat format, const Environment& env) {
  TimeTraceModel model;
  model.peak = p.number("peak");
  model.t0 = p.number("t0");
  model.cross_correlation_fwhm =
      p.has("fwhm-ps") ? p.number("fwhm-ps") : default_cross_correlation_fwhm_ps(p.number("pulse-fs"));
  if (p.has("decay-tau")) model.decay_tau = p.number("decay-tau");
  const NoiseSpec noise{p.number("sigma"), p.integer("seed")};
  const TimeTrace trace =
      synth_time_trace(model, delay_grid(p.number("from"), p.number("to"), p.number("step")), noise);
  const json meta = {{"config", provenance("synth trace", p)},
                     {"generator", std::string(kGeneratorName)},
                     {"seed", noise.seed}};
  return finalize_dataset(write_time_trace(trace, meta, format), format, env);
}

std::string cmd_fit(const Params& p, FileFormat format, const Environment& env) {
  const auto loaded = read_helicity_scan(read_file(p.text("input")));
  const FitTables t = fit_all(loaded.data);
  json doc = with_kind("harmonic_fit_report", "fit", p);
  doc["input_metadata"] = loaded.metadata;
  merge_into(doc, fit_summary(t));
  if (format == FileFormat::csv) return finalize_csv(csv_report(doc, kResidualColumns, t.rows), env);
  doc["residual_table"] = rows_json(kResidualColumns, t.rows);
  return finalize_json(doc, env);
}

std::string cmd_fluence(const Params& p, FileFormat format, const Environment& env) {
  const auto loaded = read_fluence_series(read_file(p.text("input")));
  const ScalingFitReport report = fit_scaling(loaded.data, {p.flag("intercept")});
  json doc = with_kind("scaling_fit_report", "fluence", p);
  doc["input_metadata"] = loaded.metadata;
  doc["coefficient_label"] = std::string(1, loaded.data.coefficient_label);
  merge_into(doc, scaling_report_json(report));
  const auto rows = scaling_rows(loaded.data, report);
  if (format == FileFormat::csv) return finalize_csv(csv_report(doc, kScalingColumns, rows), env);
  doc["table"] = rows_json(kScalingColumns, rows);
  return finalize_json(doc, env);
}

std::string cmd_geometry(const Params& p, FileFormat format, const Environment& env) {
  const BeamGeometry g{p.number("incidence"), p.number("n-outside"), p.number("n-inside")};
  const double angle = refraction_angle(g);
  const double fraction = transverse_field_fraction(g);
  const Vec3 field = normalized(p.vector3("field"));
  const NvProjections proj = nv_projections(field);

  json doc = with_kind("geometry_report", "geometry", p);
  doc["refraction_angle_deg"] = angle;
  doc["transverse_field_fraction"] = fraction;
  doc["transverse_field_percent"] = 100.0 * fraction;
  doc["field_direction"] = field;
  doc["nv_axes"] = {"[111]", "[1-1-1]", "[-1-11]", "[-11-1]"};
  doc["nv_projection_cosines"] = proj.cosines;
  doc["nv_mean_abs_projection"] = proj.mean_abs;
  if (format == FileFormat::csv) {
    std::vector<std::pair<std::string, double>> rows = {{"refraction_angle_deg", angle},
                                                        {"transverse_field_fraction", fraction}};
    for (std::size_t i = 0; i < 4; ++i) rows.emplace_back("nv_projection_" + std::to_string(i), proj.cosines[i]);
    rows.emplace_back("nv_mean_abs_projection", proj.mean_abs);
    return finalize_csv(csv_key_values(doc, rows), env);
  }
  return finalize_json(doc, env);
}

json magnetometry_json(const Params& p, double theta_icme, double m, double n, double chi2, double floor) {
  QuotedFigures quoted;
  quoted.chi2_deg_per_t2 = chi2;
  quoted.detection_limit_tesla = p.number("quoted-limit");
  quoted.icme_rotation_deg = theta_icme;
  quoted.ife_field_tesla = m;
  quoted.theta_floor_deg = floor;
  const ConsistencyReport c = check_quoted_figures(n, quoted);
  const FieldEstimate ife =
      ife_magnetization_scale(p.number("theta-ife"), {p.number("ref-deg"), p.number("ref-tesla")});
  return {
      {"refractive_index", n},
      {"chi2",
       {{"computed_deg_per_t2", c.computed_chi2},
        {"quoted_deg_per_t2", quoted.chi2_deg_per_t2},
        {"quoted_over_computed", c.chi2_ratio},
        {"within_factor_2", c.chi2_within_factor_2},
        {"implied_n", c.implied_n_from_chi2}}},
      {"detection_limit",
       {{"from_quoted_chi2_tesla", c.limit_from_quoted_chi2},
        {"from_quoted_chi2_oersted", tesla_to_oersted(c.limit_from_quoted_chi2)},
        {"from_computed_chi2_tesla", c.limit_from_computed_chi2},
        {"from_computed_chi2_oersted", tesla_to_oersted(c.limit_from_computed_chi2)},
        {"quoted_tesla", quoted.detection_limit_tesla},
        {"quoted_over_computed", c.limit_ratio},
        {"within_factor_2", c.limit_within_factor_2},
        {"implied_n", c.implied_n_from_limit}}},
      {"ife_magnetization",
       {{"tesla", ife.magnitude},
        {"oersted", ife.magnitude_oe},
        {"calibration", {{"degrees", p.number("ref-deg")}, {"tesla", p.number("ref-tesla")}}},
        {"provenance", ife.provenance}}}};
}

std::string cmd_estimate(const Params& p, FileFormat format, const Environment& env) {
  json doc = with_kind("magnetometry_report", "estimate", p);
  const json body =
      magnetometry_json(p, p.number("theta-icme"), p.number("m"), p.number("n"), p.number("chi2"), p.number("floor"));
  for (const auto& [k, v] : body.items()) doc[k] = v;
  if (format == FileFormat::csv) {
    return finalize_csv(csv_key_values(doc, {{"chi2_computed_deg_per_t2", body["chi2"]["computed_deg_per_t2"]},
                                             {"chi2_quoted_deg_per_t2", body["chi2"]["quoted_deg_per_t2"]},
                                             {"chi2_implied_n", body["chi2"]["implied_n"]},
                                             {"limit_from_quoted_chi2_tesla", body["detection_limit"]["from_quoted_chi2_tesla"]},
                                             {"limit_quoted_tesla", body["detection_limit"]["quoted_tesla"]},
                                             {"limit_implied_n", body["detection_limit"]["implied_n"]},
                                             {"ife_magnetization_tesla", body["ife_magnetization"]["tesla"]}}),
                        env);
  }
  return finalize_json(doc, env);
}

std::string cmd_report(const Params& p, FileFormat format, const Environment& env) {
  const std::uint64_t seed = p.integer("seed");
  const HarmonicCoefficients truth{p.number("C"), p.number("L"), p.number("F"), p.number("D")};
  const double scan_fluence = p.number("fluence");

  // helicity scan at the reference fluence, fitted both ways
  const HelicityScan scan =
      synth_helicity_scan(truth, default_alpha_grid(), {p.number("scan-sigma"), derive_seed(seed, 0)}, scan_fluence);
  const FitTables tables = fit_all(scan);

  // fluence series: C and L linear, F quadratic, matched to the scan amplitudes
  const std::vector<double> fluences = fluence_grid(p.number("from"), p.number("to"), p.integer("points"));
  const FluenceRange range{p.number("from"), p.number("to")};
  struct SeriesSpec {
    char label;
    ScalingLaw law;
    double value_at_scan;
  };
  const std::array<SeriesSpec, 3> specs = {{{'C', ScalingLaw::linear, truth.c},
                                            {'L', ScalingLaw::linear, truth.l},
                                            {'F', ScalingLaw::quadratic, truth.f}}};
  json fig4 = json::array();
  std::vector<std::pair<char, std::vector<std::vector<double>>>> fig4_rows;
  std::uint64_t stream = 1;
  for (const SeriesSpec& s : specs) {
    const double scale = s.law == ScalingLaw::linear ? scan_fluence : scan_fluence * scan_fluence;
    const FluenceLaw law{s.law, s.value_at_scan / scale};
    const double sigma = p.number("noise-fraction") * std::abs(law.evaluate(fluences.back()));
    const FluenceSeries series =
        synth_fluence_series(law, fluences, {sigma, derive_seed(seed, stream++)}, s.label, range);
    const ScalingFitReport fit = fit_scaling(series);
    const auto rows = scaling_rows(series, fit);
    json entry = {{"coefficient_label", std::string(1, s.label)},
                  {"generating_law", to_json(law)},
                  {"sigma_deg", sigma},
                  {"fit", scaling_report_json(fit)}};
    if (format == FileFormat::json) entry["table"] = rows_json(kScalingColumns, rows);
    fig4.push_back(entry);
    fig4_rows.emplace_back(s.label, rows);
  }

  const BeamGeometry geometry{p.number("incidence"), 1.0, p.number("n")};
  json doc = with_kind("figure_report", "report", p);
  doc["generator"] = std::string(kGeneratorName);
  doc["helicity_scan"] = {{"truth", to_json(truth)}, {"fluence_mj_cm2", scan_fluence}};
  merge_into(doc["helicity_scan"], fit_summary(tables));
  if (format == FileFormat::json) doc["helicity_scan"]["residual_table"] = rows_json(kResidualColumns, tables.rows);
  doc["fluence_dependence"] = fig4;
  doc["geometry"] = {{"refraction_angle_deg", refraction_angle(geometry)},
                     {"transverse_field_fraction", transverse_field_fraction(geometry)}};
  doc["magnetometry"] = magnetometry_json(Params(json{{"quoted-limit", 35e-3},
                                                      {"theta-ife", truth.c},
                                                      {"ref-deg", 1.9e-3},
                                                      {"ref-tesla", 1.0}}),
                                          truth.f, 1.0, p.number("n"), 3.2e-3, 1e-6);
  if (format == FileFormat::json) return finalize_json(doc, env);

  std::string body = metadata_line(doc);
  body += "# section: helicity_scan\n";
  body += csv_report(json::object(), kResidualColumns, tables.rows).substr(5);  // drop the empty "# {}\n"
  for (const auto& [label, rows] : fig4_rows) {
    body += std::string("# section: fluence_") + label + "\n";
    body += csv_report(json::object(), kScalingColumns, rows).substr(5);
  }
  return finalize_csv(body, env);
}

using Handler = std::string (*)(const Params&, FileFormat, const Environment&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"synth helicity", cmd_synth_helicity}, {"synth fluence", cmd_synth_fluence},
      {"synth trace", cmd_synth_trace},       {"fit", cmd_fit},
      {"fluence", cmd_fluence},               {"geometry", cmd_geometry},
      {"estimate", cmd_estimate},             {"report", cmd_report}};
  return table;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

}  // namespace

Environment default_environment() { return {utc_now}; }

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

std::string strip_timestamp(const std::string& output) {
  std::istringstream in(output);
  std::string out, line;
  while (std::getline(in, line)) {
    if (line.rfind("# generated_at:", 0) == 0) continue;
    if (line.find("\"generated_at\":") != std::string::npos) continue;
    out += line + "\n";
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Environment& env) {
  CLI::App app{"nvkerr: synthesis and analysis of helicity-resolved Kerr-rotation data", "nvkerr"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  struct Bound {
    const Command* command;
    CLI::App* app;
    std::map<std::string, std::string> text;
    std::map<std::string, bool> flags;
    std::string format, config, output;
  };
  static const std::vector<Command> commands = command_table();
  std::vector<std::unique_ptr<Bound>> bound;

  CLI::App* synth = app.add_subcommand("synth", "Generate synthetic datasets");
  synth->require_subcommand(1);

  for (const Command& cmd : commands) {
    auto b = std::make_unique<Bound>();
    b->command = &cmd;
    const bool nested = cmd.path.rfind("synth ", 0) == 0;
    const std::string name = nested ? cmd.path.substr(6) : cmd.path;
    b->app = (nested ? synth : &app)->add_subcommand(name, cmd.summary);
    for (const Param& prm : cmd.params) {
      std::string desc = prm.help;
      if (!prm.fallback.is_null() && prm.kind != Kind::flag) desc += " [default " + prm.fallback.dump() + "]";
      if (prm.required) desc += " (required)";
      if (prm.kind == Kind::flag) {
        b->app->add_flag("--" + prm.key, b->flags[prm.key], desc);
      } else {
        b->app->add_option("--" + prm.key, b->text[prm.key], desc);
      }
    }
    b->app->add_option("--format", b->format, "csv | json [default " + cmd.default_format + "]")
        ->check(CLI::IsMember({"csv", "json"}));
    b->app->add_option("--config", b->config, "JSON file whose keys override flags");
    b->app->add_option("--out", b->output, "output path (default stdout)");
    bound.push_back(std::move(b));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "nvkerr: " << e.what() << "\n";
    if (const auto* leaf = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << "run 'nvkerr " << leaf->get_name() << " --help' for usage\n";
    }
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  Bound* active = nullptr;
  for (auto& b : bound) {
    if (b->app->parsed()) active = b.get();
  }
  if (!active) {
    err << "nvkerr: no command given\n" << app.help();
    return kExitUsage;
  }
  const Command& cmd = *active->command;

  try {
    json values = json::object();
    for (const Param& prm : cmd.params) {
      json v = prm.fallback;
      if (prm.kind == Kind::flag) {
        if (active->flags[prm.key]) v = true;
      } else if (active->app->count("--" + prm.key) > 0) {
        v = convert_flag(prm, active->text[prm.key]);
      }
      values[prm.key] = v;
    }
    std::string format_name = active->format.empty() ? cmd.default_format : active->format;

    if (!active->config.empty()) {
      json cfg;
      try {
        cfg = json::parse(read_file(active->config));
      } catch (const json::exception& e) {
        throw UsageError("--config: " + std::string(e.what()));
      } catch (const std::runtime_error& e) {
        throw UsageError("--config: " + std::string(e.what()));
      }
      if (!cfg.is_object()) throw UsageError("--config: top level must be a JSON object");
      for (const auto& [key, v] : cfg.items()) {
        if (key == "command") {
          if (v != cmd.path) throw UsageError("--config: written for command '" + v.dump() + "', not '" + cmd.path + "'");
          continue;
        }
        if (key == "format") {
          if (!v.is_string()) throw UsageError("--config: format must be a string");
          format_name = v.get<std::string>();
          continue;
        }
        const auto it = std::find_if(cmd.params.begin(), cmd.params.end(), [&](const Param& prm) { return prm.key == key; });
        if (it == cmd.params.end()) throw UsageError("--config: unknown key '" + key + "' for '" + cmd.path + "'");
        if (!v.is_null()) check_config_value(*it, v);
        values[key] = v;
      }
    }
    for (const Param& prm : cmd.params) {
      if (prm.required && values[prm.key].is_null()) {
        throw UsageError("missing required parameter --" + prm.key + " for '" + cmd.path + "'");
      }
    }
    if (format_name != "csv" && format_name != "json") throw UsageError("format must be csv or json");
    values["format"] = format_name;

    const Params params(values);
    const std::string text = handlers().at(cmd.path)(params, file_format_from_string(format_name), env);
    if (active->output.empty()) {
      out << text;
    } else {
      std::ofstream file(active->output, std::ios::binary);
      if (!file) throw std::runtime_error("cannot write '" + active->output + "'");
      file << text;
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "nvkerr " << cmd.path << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "nvkerr " << cmd.path << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace nvkerr::cli
