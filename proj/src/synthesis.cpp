#include "nvkerr/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nvkerr/error.hpp"

namespace nvkerr {

void NoiseSpec::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("noise: sigma must be finite and >= 0");
}

GaussianNoise::GaussianNoise(std::uint64_t seed) : engine_(seed) {}

double GaussianNoise::standard() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 53-bit uniforms; u1 in (0, 1] keeps the log finite
  constexpr double scale = 1.0 / 9007199254740992.0;
  const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * scale;
  const double u2 = static_cast<double>(engine_() >> 11) * scale;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void HelicityScan::validate() const {
  if (!(fluence > 0.0)) throw DomainError("helicity scan: fluence must be > 0");
  for (const auto& p : points) {
    if (!(p.alpha_deg >= 0.0 && p.alpha_deg < 360.0)) {
      throw DomainError("helicity scan: alpha must lie in [0, 360)");
    }
    if (!(p.sigma_deg >= 0.0)) throw DomainError("helicity scan: sigma must be >= 0");
    if (!std::isfinite(p.delta_theta_deg)) throw DomainError("helicity scan: non-finite rotation");
  }
}

std::vector<double> uniform_alpha_grid(std::size_t count) {
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = 180.0 * static_cast<double>(i) / static_cast<double>(count);
  return grid;
}

std::vector<double> default_alpha_grid() { return uniform_alpha_grid(24); }

HelicityScan synth_helicity_scan(const HarmonicCoefficients& coeffs, std::span<const double> alpha_grid,
                                 const NoiseSpec& noise, double fluence) {
  if (alpha_grid.empty()) throw DomainError("synth helicity: alpha grid is empty");
  noise.validate();
  HelicityScan scan;
  scan.fluence = fluence;
  scan.points.reserve(alpha_grid.size());
  GaussianNoise draw(noise.seed);
  for (double alpha : alpha_grid) {
    const WavePlateSetting setting(alpha);
    scan.points.push_back(
        {setting.degrees(), signal_model_extended(setting, coeffs) + draw(noise.sigma), noise.sigma});
  }
  scan.validate();
  return scan;
}

std::string_view to_string(ScalingLaw law) { return law == ScalingLaw::linear ? "linear" : "quadratic"; }

ScalingLaw scaling_law_from_string(std::string_view name) {
  if (name == "linear") return ScalingLaw::linear;
  if (name == "quadratic") return ScalingLaw::quadratic;
  throw DomainError("unknown scaling law '" + std::string(name) + "' (expected linear or quadratic)");
}

double FluenceLaw::evaluate(double fluence) const {
  return kind == ScalingLaw::linear ? coefficient * fluence : coefficient * fluence * fluence;
}

void FluenceSeries::validate() const {
  if (coefficient_label != 'C' && coefficient_label != 'L' && coefficient_label != 'F') {
    throw DomainError("fluence series: coefficient label must be C, L or F");
  }
  double previous = 0.0;
  for (const auto& e : entries) {
    if (!(e.fluence > 0.0)) throw DomainError("fluence series: fluences must be > 0");
    if (!(e.fluence > previous)) throw DomainError("fluence series: fluences must be strictly increasing");
    if (!(e.sigma >= 0.0)) throw DomainError("fluence series: sigma must be >= 0");
    previous = e.fluence;
  }
}

std::vector<double> fluence_grid(double from, double to, std::size_t points) {
  if (points == 0) return {};
  if (points == 1) return {from};
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  grid.back() = to;
  return grid;
}

FluenceSeries synth_fluence_series(const FluenceLaw& law, std::span<const double> fluences,
                                   const NoiseSpec& noise, char coefficient_label, FluenceRange range) {
  noise.validate();
  if (fluences.empty()) throw DomainError("synth fluence: fluence list is empty");
  if (!(range.min > 0.0) || !(range.max >= range.min)) {
    throw DomainError("synth fluence: range must be positive and ordered");
  }
  FluenceSeries series;
  series.coefficient_label = coefficient_label;
  series.generating_law = law;
  GaussianNoise draw(noise.seed);
  for (double fluence : fluences) {
    if (!(fluence > 0.0)) throw DomainError("synth fluence: fluence must be > 0");
    if (fluence < range.min || fluence > range.max) {
      throw DomainError("synth fluence: fluence outside the configured range");
    }
    series.entries.push_back({fluence, law.evaluate(fluence) + draw(noise.sigma), noise.sigma});
  }
  series.validate();
  return series;
}

std::vector<double> delay_grid(double from, double to, double step) {
  if (!(step > 0.0) || !(to >= from)) throw DomainError("delay grid: need step > 0 and to >= from");
  const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = from + step * static_cast<double>(i);
  return grid;
}

TimeTrace synth_time_trace(const TimeTraceModel& model, std::span<const double> t_grid,
                           const NoiseSpec& noise, DelayWindow window) {
  if (t_grid.empty()) throw DomainError("synth trace: delay grid is empty");
  noise.validate();
  if (t_grid.front() < window.min || t_grid.back() > window.max) {
    throw DomainError("synth trace: delay grid leaves the configured window");
  }
  const std::vector<double> clean = time_trace(model, t_grid);
  TimeTrace trace{model, {}};
  trace.points.reserve(t_grid.size());
  GaussianNoise draw(noise.seed);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    trace.points.push_back({t_grid[i], clean[i] + draw(noise.sigma), noise.sigma});
  }
  return trace;
}

}  // namespace nvkerr
