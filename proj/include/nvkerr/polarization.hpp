/**
 * @file polarization.hpp
 * @brief Jones/Stokes description of the pump after a rotatable quarter-wave plate.
 *
 * The pump enters the plate horizontally (p-) polarized. Rotating the plate's
 * fast axis by alpha sweeps the output through
 *   0 deg linear, 45 deg right-circular, 90 deg linear, 135 deg left-circular.
 *
 * Stokes convention:
 *   s0 = |ex|^2 + |ey|^2
 *   s1 = |ex|^2 - |ey|^2
 *   s2 = 2 Re(ex conj(ey))
 *   s3 = -2 Im(ex conj(ey))     (alpha = 45 deg gives s3 = +1)
 *
 * Angles cross the API in degrees; trigonometry is done in radians.
 */

#pragma once

#include <complex>
#include <numbers>

namespace nvkerr {

using complex = std::complex<double>;

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Transverse complex field amplitude. |ex|^2 + |ey|^2 is the intensity.
struct JonesVector {
  complex ex{0.0, 0.0};
  complex ey{0.0, 0.0};

  double intensity() const { return std::norm(ex) + std::norm(ey); }
  /// Multiply by a unit-modulus scalar; Stokes parameters are unchanged.
  JonesVector with_global_phase(double phase_rad) const;
};

struct StokesVector {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;

  /// s0^2 - (s1^2 + s2^2 + s3^2); zero for fully polarized light.
  double polarization_defect() const { return s0 * s0 - (s1 * s1 + s2 * s2 + s3 * s3); }
};

/// Quarter-wave plate fast-axis angle in degrees, wrapped into [0, 360).
class WavePlateSetting {
 public:
  WavePlateSetting() = default;
  explicit WavePlateSetting(double alpha_deg);

  double degrees() const { return alpha_deg_; }
  double radians() const { return deg_to_rad(alpha_deg_); }

 private:
  double alpha_deg_ = 0.0;
};

/// Jones vector after an ideal lossless QWP acting on p-polarized input of
/// the given intensity. Throws DomainError for negative intensity.
JonesVector qwp_state(WavePlateSetting alpha, double input_intensity = 1.0);

StokesVector stokes(const JonesVector& j);

/// s3 of the unit-intensity QWP output; equals sin(2 alpha).
double helicity_factor(WavePlateSetting alpha);

/// Linear-polarization projection onto the reference axes, 2 s1/s0 - 1 of the
/// unit-intensity QWP output; equals cos(4 alpha) and is 1 at alpha = 0.
double linear_anisotropy_factor(WavePlateSetting alpha);

}  // namespace nvkerr
