#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nvkerr/polarization.hpp"

namespace nvkerr {

/// Material and setup constants. mo_alpha and mo_beta are calibration
/// constants in arbitrary units; chi2_mo carries the quantitative scale.
struct MaterialParams {
  double n = 2.41;                   ///< refractive index of diamond near 800 nm
  double mo_alpha = 1.0;             ///< first-order magneto-optical coefficient
  double mo_beta = 1.0;              ///< second-order magneto-optical coefficient
  double chi2_mo = 3.2e-3;           ///< second-order MO susceptibility, deg/T^2
  double pulse_fwhm_fs = 40.0;       ///< pump pulse duration
  double theta_sensitivity = 1e-6;   ///< rotation noise floor, deg

  /// Throws DomainError unless n > 1, pulse_fwhm_fs > 0, theta_sensitivity >= 0.
  void validate() const;
};

/// Helicity-scan harmonic amplitudes, all in degrees of Kerr rotation.
struct HarmonicCoefficients {
  double c = 0.0;  ///< sin 2a (IFE)
  double l = 0.0;  ///< sin 4a (OKE)
  double f = 0.0;  ///< sin 6a (ICME)
  double d = 0.0;  ///< polarization-independent offset

  bool operator==(const HarmonicCoefficients&) const = default;
};

inline constexpr double kCrossCorrelationFactor = 1.4142135623730951;  // sqrt(2)

/// Cross-correlation width (ps) of two equal Gaussian pulses of the given
/// duration (fs). The factor is exposed so other pulse shapes can be used.
double default_cross_correlation_fwhm_ps(double pulse_fwhm_fs,
                                         double factor = kCrossCorrelationFactor);

struct TimeTraceModel {
  double peak = 0.0;                    ///< deg
  double t0 = 0.0;                      ///< ps
  double cross_correlation_fwhm = 0.0;  ///< ps
  std::optional<double> decay_tau;      ///< ps

  void validate() const;
  /// Instantaneous-response model for a pump of the given material's pulse width.
  static TimeTraceModel instantaneous(double peak, const MaterialParams& material, double t0 = 0.0);
};

/// mo_alpha * s3: the axial field of i alpha (E x E*). Zero for linear light.
double ife_field(const JonesVector& state, double mo_alpha);

/// mo_beta * s0 * m_transverse: i beta (E . E*) M projected on the transverse axis.
double icme_field(const JonesVector& state, double m_transverse_tesla, double mo_beta);

/// C sin2a + L sin4a + D. The f member is ignored.
double signal_model_eq3(WavePlateSetting alpha, const HarmonicCoefficients& coeffs);

/// C sin2a + L sin4a + F sin6a + D.
double signal_model_extended(WavePlateSetting alpha, const HarmonicCoefficients& coeffs);

/// amplitude * sin2a * cos4a, i.e. (amplitude/2)(sin6a - sin2a): the IFE
/// helicity factor modulating the ICME linear-anisotropy factor.
double two_step_icme(WavePlateSetting alpha, double amplitude);

/// Kerr rotation vs delay (ps). Gaussian of the cross-correlation width,
/// multiplied by exp(-(t - t0)/tau) for t > t0 when decay_tau is set.
/// Throws DomainError if t_grid is not ascending.
std::vector<double> time_trace(const TimeTraceModel& model, std::span<const double> t_grid);

}  // namespace nvkerr
