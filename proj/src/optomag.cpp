#include "nvkerr/optomag.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nvkerr/error.hpp"

namespace nvkerr {

void MaterialParams::validate() const {
  if (!(n > 1.0)) throw DomainError("material: refractive index must be > 1");
  if (!(pulse_fwhm_fs > 0.0)) throw DomainError("material: pulse_fwhm must be > 0");
  if (!(theta_sensitivity >= 0.0)) throw DomainError("material: theta_sensitivity must be >= 0");
}

double default_cross_correlation_fwhm_ps(double pulse_fwhm_fs, double factor) {
  if (!(pulse_fwhm_fs > 0.0) || !(factor > 0.0)) {
    throw DomainError("cross-correlation: pulse width and factor must be > 0");
  }
  return factor * pulse_fwhm_fs * 1e-3;
}

void TimeTraceModel::validate() const {
  if (!(cross_correlation_fwhm > 0.0)) {
    throw DomainError("time trace: cross_correlation_fwhm must be > 0");
  }
  if (decay_tau && !(*decay_tau > 0.0)) throw DomainError("time trace: decay_tau must be > 0");
}

TimeTraceModel TimeTraceModel::instantaneous(double peak, const MaterialParams& material, double t0) {
  return {peak, t0, default_cross_correlation_fwhm_ps(material.pulse_fwhm_fs), std::nullopt};
}

double ife_field(const JonesVector& state, double mo_alpha) { return mo_alpha * stokes(state).s3; }

double icme_field(const JonesVector& state, double m_transverse_tesla, double mo_beta) {
  return mo_beta * state.intensity() * m_transverse_tesla;
}

double signal_model_eq3(WavePlateSetting alpha, const HarmonicCoefficients& coeffs) {
  const double a = alpha.radians();
  return coeffs.c * std::sin(2 * a) + coeffs.l * std::sin(4 * a) + coeffs.d;
}

double signal_model_extended(WavePlateSetting alpha, const HarmonicCoefficients& coeffs) {
  return signal_model_eq3(alpha, coeffs) + coeffs.f * std::sin(6 * alpha.radians());
}

double two_step_icme(WavePlateSetting alpha, double amplitude) {
  const double a = alpha.radians();
  return amplitude * std::sin(2 * a) * std::cos(4 * a);
}

std::vector<double> time_trace(const TimeTraceModel& model, std::span<const double> t_grid) {
  if (t_grid.empty()) return {};
  model.validate();
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) {
    throw DomainError("time trace: delay grid must be sorted ascending");
  }
  // exp(-4 ln2 x^2 / w^2) is 1/2 at x = w/2
  const double k = 4.0 * std::numbers::ln2 / (model.cross_correlation_fwhm * model.cross_correlation_fwhm);
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const double dt = t - model.t0;
    double v = model.peak * std::exp(-k * dt * dt);
    if (model.decay_tau && dt > 0.0) v *= std::exp(-dt / *model.decay_tau);
    out.push_back(v);
  }
  return out;
}

}  // namespace nvkerr
