#pragma once

#include <string>

namespace nvkerr {

inline constexpr double kOerstedPerTesla = 1e4;

constexpr double tesla_to_oersted(double tesla) { return tesla * kOerstedPerTesla; }
constexpr double oersted_to_tesla(double oersted) { return oersted / kOerstedPerTesla; }

struct FieldEstimate {
  double magnitude = 0.0;     ///< tesla
  double magnitude_oe = 0.0;  ///< always tesla_to_oersted(magnitude)
  std::string provenance;

  static FieldEstimate from_tesla(double tesla, std::string provenance);
};

/// chi' = n * dtheta / M^2 (deg/T^2), inverting dtheta ~ (chi'/n) |M|^2.
double chi2_from_rotation(double delta_theta_icme_deg, double m_tesla, double n);

/// Smallest |M| whose ICME rotation reaches the noise floor: sqrt(n floor / chi').
FieldEstimate detection_limit(double chi2_deg_per_t2, double theta_floor_deg, double n);

/// Linear calibration of IFE magnetization against a single reference
/// rotation. This is a proportional scale, not a derived susceptibility.
struct IfeCalibration {
  double degrees = 1.9e-3;
  double tesla = 1.0;
};

FieldEstimate ife_magnetization_scale(double delta_theta_ife_deg, const IfeCalibration& reference = {});

/// Quoted figures of merit used for side-by-side comparison.
struct QuotedFigures {
  double chi2_deg_per_t2 = 3.2e-3;
  double detection_limit_tesla = 35e-3;
  double icme_rotation_deg = 8.0e-4;
  double ife_rotation_deg = 1.9e-3;
  double ife_field_tesla = 1.0;
  double theta_floor_deg = 1.0e-6;
};

struct ConsistencyReport {
  double n = 0.0;
  double computed_chi2 = 0.0;               ///< from the quoted ICME rotation and field
  double chi2_ratio = 0.0;                  ///< quoted / computed
  double limit_from_quoted_chi2 = 0.0;      ///< tesla
  double limit_from_computed_chi2 = 0.0;    ///< tesla
  double limit_ratio = 0.0;                 ///< quoted / limit_from_quoted_chi2
  double implied_n_from_chi2 = 0.0;         ///< n that reproduces the quoted chi'
  double implied_n_from_limit = 0.0;        ///< n that reproduces the quoted limit from the quoted chi'
  bool chi2_within_factor_2 = false;
  bool limit_within_factor_2 = false;
};

/// Recomputes the quoted figures of merit at refractive index n.
ConsistencyReport check_quoted_figures(double n, const QuotedFigures& quoted = {});

}  // namespace nvkerr
