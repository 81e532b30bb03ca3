/**
 * @file analysis.hpp
 * @brief Parameter recovery from synthetic or measured Kerr-rotation data.
 *
 * Helicity scans are decomposed on the harmonic basis {sin2a, sin4a, sin6a, 1}
 * either directly (fit_extended) or in two stages: the three-term model first
 * (fit_eq3), then F sin6a fitted to its residual (fit_residual_sin6). The two
 * agree exactly when the basis is orthogonal on the sampled angles, which is
 * the case for uniform sampling of one 180-degree period with >= 7 points
 * (the default 24-point grid included).
 */

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nvkerr/optomag.hpp"
#include "nvkerr/synthesis.hpp"

namespace nvkerr {

// ---------------------------------------------------------------------------
// Peak extraction

enum class ZeroPeakPolicy { error, flag };

struct PeakConfig {
  double window_center_ps = 0.0;
  double window_half_width_ps = 1.0;
  ZeroPeakPolicy zero_policy = ZeroPeakPolicy::error;
};

struct PeakResult {
  double peak = 0.0;    ///< deg, signed
  double t_peak = 0.0;  ///< ps
  bool zero_signal = false;
};

/// Signed extremum of largest magnitude inside the window, refined by the
/// vertex of the parabola through the three samples bracketing it.
PeakResult extract_peak(const TimeTrace& trace, const PeakConfig& config = {});

// ---------------------------------------------------------------------------
// Harmonic decomposition

enum class FitMethod { direct, two_stage };
std::string_view to_string(FitMethod method);

/// Coefficient order used by the 4x4 covariance: C, L, F, D.
enum HarmonicIndex : int { kIndexC = 0, kIndexL = 1, kIndexF = 2, kIndexD = 3 };

struct HarmonicFitReport {
  HarmonicCoefficients coeffs;
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();  ///< deg^2
  double residual_rms = 0.0;                             ///< deg
  double reduced_chi_square = 0.0;
  FitMethod method = FitMethod::direct;
  bool includes_sin6 = false;       ///< false for the three-term model (F fixed at 0)
  bool orthogonal_sampling = false; ///< basis orthogonal under the weighted sampled inner product
  bool weighted = false;
  std::size_t points = 0;

  double sigma(HarmonicIndex i) const { return std::sqrt(std::max(0.0, covariance(i, i))); }
  /// Model prediction at alpha using the fitted coefficients.
  double model(WavePlateSetting alpha) const;
};

/// Three-term model C sin2a + L sin4a + D with F fixed at 0.
HarmonicFitReport fit_eq3(const HelicityScan& scan);

struct ResidualFit {
  double f = 0.0;
  double f_sigma = 0.0;
};

/// F sin6a fitted to (data - base model) by weighted least squares.
ResidualFit fit_residual_sin6(const HelicityScan& scan, const HarmonicFitReport& base);

/// Two-stage procedure combined into one report: the fit_eq3 coefficients
/// plus F from fit_residual_sin6. Cross-covariances between F and the
/// first-stage terms are left at zero.
HarmonicFitReport fit_two_stage(const HelicityScan& scan);

/// Direct fit on {sin2a, sin4a, sin6a, 1}.
HarmonicFitReport fit_extended(const HelicityScan& scan);

/// Whether the harmonic basis is orthogonal (relative 1e-10) on the scan's
/// angles under its weights.
bool is_orthogonal_sampling(const HelicityScan& scan);

/// Components of `values` sampled at `alpha_grid` projected onto
/// {sin2a, sin4a, sin6a, 1}, assuming orthogonal sampling. Order C, L, F, D.
std::array<double, 4> harmonic_projection(std::span<const double> alpha_grid, std::span<const double> values);

/// Scan reflected by alpha -> alpha + 90 deg, which reverses the pump helicity.
HelicityScan helicity_reversed(const HelicityScan& scan);

// ---------------------------------------------------------------------------
// Fluence scaling

struct LawFit {
  double coefficient = 0.0;
  double coefficient_sigma = 0.0;
  std::optional<double> intercept;
  std::optional<double> intercept_sigma;
  double reduced_chi_square = 0.0;
};

struct ScalingConfig {
  bool intercept = false;  ///< fits are through the origin unless enabled
};

struct ScalingFitReport {
  ScalingLaw selected = ScalingLaw::linear;
  double coefficient = 0.0;  ///< a (deg cm^2/mJ) or b (deg cm^4/mJ^2) of the selected law
  double coefficient_sigma = 0.0;
  std::map<ScalingLaw, LawFit> per_law;

  double reduced_chi_square(ScalingLaw law) const { return per_law.at(law).reduced_chi_square; }
};

/// Fits value = a I and value = b I^2 and selects the lower reduced chi^2,
/// preferring the linear law on ties. Needs >= 3 entries.
ScalingFitReport fit_scaling(const FluenceSeries& series, const ScalingConfig& config = {});

}  // namespace nvkerr
