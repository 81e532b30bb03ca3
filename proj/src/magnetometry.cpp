#include "nvkerr/magnetometry.hpp"

#include <cmath>

#include "nvkerr/error.hpp"

namespace nvkerr {

FieldEstimate FieldEstimate::from_tesla(double tesla, std::string provenance) {
  if (!(tesla >= 0.0)) throw DomainError("field estimate: magnitude must be >= 0");
  return {tesla, tesla_to_oersted(tesla), std::move(provenance)};
}

namespace {

void require_index(double n) {
  if (!(n >= 1.0) || !std::isfinite(n)) throw DomainError("refractive index must be finite and >= 1");
}

bool within_factor(double ratio, double factor) { return ratio > 0.0 && ratio <= factor && ratio >= 1.0 / factor; }

}  // namespace

double chi2_from_rotation(double delta_theta_icme_deg, double m_tesla, double n) {
  if (!(m_tesla > 0.0)) throw DomainError("chi2_from_rotation: field must be > 0");
  if (!(delta_theta_icme_deg >= 0.0)) throw DomainError("chi2_from_rotation: rotation must be >= 0");
  require_index(n);
  return n * delta_theta_icme_deg / (m_tesla * m_tesla);
}

FieldEstimate detection_limit(double chi2_deg_per_t2, double theta_floor_deg, double n) {
  if (!(chi2_deg_per_t2 > 0.0)) throw DomainError("detection_limit: chi' must be > 0");
  if (!(theta_floor_deg > 0.0)) throw DomainError("detection_limit: rotation floor must be > 0");
  require_index(n);
  return FieldEstimate::from_tesla(std::sqrt(n * theta_floor_deg / chi2_deg_per_t2),
                                   "sqrt(n * floor / chi'), n=" + std::to_string(n));
}

FieldEstimate ife_magnetization_scale(double delta_theta_ife_deg, const IfeCalibration& reference) {
  if (!(reference.degrees > 0.0)) throw DomainError("ife_magnetization_scale: reference rotation must be > 0");
  if (!(reference.tesla >= 0.0)) throw DomainError("ife_magnetization_scale: reference field must be >= 0");
  // the sign of the rotation follows helicity; the magnitude is what scales
  return FieldEstimate::from_tesla(std::abs(delta_theta_ife_deg) * reference.tesla / reference.degrees,
                                   "linear scaling against calibration point");
}

ConsistencyReport check_quoted_figures(double n, const QuotedFigures& quoted) {
  require_index(n);
  ConsistencyReport r;
  r.n = n;
  r.computed_chi2 = chi2_from_rotation(quoted.icme_rotation_deg, quoted.ife_field_tesla, n);
  r.chi2_ratio = quoted.chi2_deg_per_t2 / r.computed_chi2;
  r.limit_from_quoted_chi2 = detection_limit(quoted.chi2_deg_per_t2, quoted.theta_floor_deg, n).magnitude;
  r.limit_from_computed_chi2 = detection_limit(r.computed_chi2, quoted.theta_floor_deg, n).magnitude;
  r.limit_ratio = quoted.detection_limit_tesla / r.limit_from_quoted_chi2;
  r.implied_n_from_chi2 =
      quoted.chi2_deg_per_t2 * quoted.ife_field_tesla * quoted.ife_field_tesla / quoted.icme_rotation_deg;
  r.implied_n_from_limit =
      quoted.chi2_deg_per_t2 * quoted.detection_limit_tesla * quoted.detection_limit_tesla / quoted.theta_floor_deg;
  r.chi2_within_factor_2 = within_factor(r.chi2_ratio, 2.0);
  r.limit_within_factor_2 = within_factor(r.limit_ratio, 2.0);
  return r;
}

}  // namespace nvkerr
