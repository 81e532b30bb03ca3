#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nvkerr/optomag.hpp"

namespace nvkerr {

/// Name of the noise generator, recorded in dataset metadata. The engine is
/// std::mt19937_64 (fully specified by the standard); normal deviates come
/// from the Box-Muller transform below rather than std::normal_distribution,
/// whose algorithm differs between standard libraries.
inline constexpr std::string_view kGeneratorName = "mt19937_64+box-muller";

struct NoiseSpec {
  double sigma = 1e-6;  ///< deg; defaults to the setup's rotation noise floor
  std::uint64_t seed = 0;

  void validate() const;
};

/// Seeded white Gaussian noise source with a platform-independent sequence.
class GaussianNoise {
 public:
  explicit GaussianNoise(std::uint64_t seed);
  /// One N(0, 1) draw.
  double standard();
  double operator()(double sigma) { return sigma == 0.0 ? 0.0 : sigma * standard(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Mixes a base seed with a stream index (splitmix64) to give independent
/// per-dataset seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

struct ScanPoint {
  double alpha_deg = 0.0;
  double delta_theta_deg = 0.0;
  double sigma_deg = 0.0;
};

struct HelicityScan {
  double fluence = 29.0;  ///< mJ/cm^2
  std::vector<ScanPoint> points;

  void validate() const;
};

/// 0 to 172.5 deg in 7.5 deg steps: 24 points over one 180-degree period, on
/// which {1, sin2a, sin4a, sin6a} are exactly orthogonal.
std::vector<double> default_alpha_grid();
/// `count` evenly spaced angles over [0, 180).
std::vector<double> uniform_alpha_grid(std::size_t count);

HelicityScan synth_helicity_scan(const HarmonicCoefficients& coeffs, std::span<const double> alpha_grid,
                                 const NoiseSpec& noise, double fluence = 29.0);

enum class ScalingLaw { linear, quadratic };
std::string_view to_string(ScalingLaw law);
ScalingLaw scaling_law_from_string(std::string_view name);

struct FluenceLaw {
  ScalingLaw kind = ScalingLaw::linear;
  double coefficient = 0.0;  ///< a (deg cm^2/mJ) or b (deg cm^4/mJ^2)

  double evaluate(double fluence) const;
};

struct FluenceEntry {
  double fluence = 0.0;
  double value = 0.0;
  double sigma = 0.0;
};

struct FluenceSeries {
  std::vector<FluenceEntry> entries;
  char coefficient_label = 'F';  ///< one of C, L, F
  FluenceLaw generating_law;     ///< provenance; meaningful for synthetic series only

  /// Fluences strictly positive and strictly increasing; label in {C, L, F}.
  void validate() const;
};

/// Accepted fluence span for synthetic series (mJ/cm^2).
struct FluenceRange {
  double min = 8.0;
  double max = 40.0;
};

/// `points` evenly spaced fluences over [from, to].
std::vector<double> fluence_grid(double from, double to, std::size_t points);

FluenceSeries synth_fluence_series(const FluenceLaw& law, std::span<const double> fluences,
                                   const NoiseSpec& noise, char coefficient_label = 'F',
                                   FluenceRange range = {});

struct TimeTracePoint {
  double delay_ps = 0.0;
  double delta_theta_deg = 0.0;
  double sigma_deg = 0.0;
};

struct TimeTrace {
  TimeTraceModel model;
  std::vector<TimeTracePoint> points;
};

/// Delay span a synthetic trace may cover (ps).
struct DelayWindow {
  double min = -15.0;
  double max = 15.0;
};

std::vector<double> delay_grid(double from, double to, double step);

TimeTrace synth_time_trace(const TimeTraceModel& model, std::span<const double> t_grid,
                           const NoiseSpec& noise, DelayWindow window = {});

}  // namespace nvkerr
