#include "nvkerr/polarization.hpp"

#include <cmath>

#include "nvkerr/error.hpp"

namespace nvkerr {

JonesVector JonesVector::with_global_phase(double phase_rad) const {
  const complex u = std::polar(1.0, phase_rad);
  return {u * ex, u * ey};
}

WavePlateSetting::WavePlateSetting(double alpha_deg) {
  double wrapped = std::fmod(alpha_deg, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  // fmod of a tiny negative value can round back up to exactly 360
  alpha_deg_ = wrapped >= 360.0 ? 0.0 : wrapped;
}

JonesVector qwp_state(WavePlateSetting alpha, double input_intensity) {
  if (!(input_intensity >= 0.0)) {
    throw DomainError("qwp_state: input intensity must be >= 0");
  }
  // R(-a) diag(1, -i) R(a) applied to (1, 0):
  //   ex = cos^2 a - i sin^2 a,  ey = (1 + i) sin a cos a
  const double amp = std::sqrt(input_intensity);
  const double c = std::cos(alpha.radians());
  const double s = std::sin(alpha.radians());
  return {amp * complex(c * c, -s * s), amp * complex(s * c, s * c)};
}

StokesVector stokes(const JonesVector& j) {
  const double ix = std::norm(j.ex);
  const double iy = std::norm(j.ey);
  const complex cross = j.ex * std::conj(j.ey);
  return {ix + iy, ix - iy, 2.0 * cross.real(), -2.0 * cross.imag()};
}

double helicity_factor(WavePlateSetting alpha) { return stokes(qwp_state(alpha, 1.0)).s3; }

double linear_anisotropy_factor(WavePlateSetting alpha) {
  const StokesVector s = stokes(qwp_state(alpha, 1.0));
  return 2.0 * s.s1 / s.s0 - 1.0;
}

}  // namespace nvkerr
