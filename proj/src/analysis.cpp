#include "nvkerr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nvkerr/error.hpp"
#include "nvkerr/least_squares.hpp"

namespace nvkerr {

namespace {

const std::array<std::string, 4> kHarmonicNames = {"sin2a", "sin4a", "sin6a", "1"};

enum class Basis { eq3, extended };

// Columns in C, L, [F], D order.
Eigen::MatrixXd harmonic_design(const HelicityScan& scan, Basis basis) {
  const auto rows = static_cast<Eigen::Index>(scan.points.size());
  const Eigen::Index cols = basis == Basis::eq3 ? 3 : 4;
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double x = deg_to_rad(scan.points[static_cast<std::size_t>(i)].alpha_deg);
    a(i, 0) = std::sin(2 * x);
    a(i, 1) = std::sin(4 * x);
    if (basis == Basis::eq3) {
      a(i, 2) = 1.0;
    } else {
      a(i, 2) = std::sin(6 * x);
      a(i, 3) = 1.0;
    }
  }
  return a;
}

std::vector<std::string> basis_names(Basis basis) {
  if (basis == Basis::eq3) return {kHarmonicNames[0], kHarmonicNames[1], kHarmonicNames[3]};
  return {kHarmonicNames.begin(), kHarmonicNames.end()};
}

std::size_t distinct_angles(const HelicityScan& scan) {
  // the model is 180-degree periodic, so alpha and alpha + 180 coincide
  std::vector<double> reduced;
  reduced.reserve(scan.points.size());
  for (const auto& p : scan.points) reduced.push_back(std::fmod(p.alpha_deg, 180.0));
  std::sort(reduced.begin(), reduced.end());
  std::size_t count = 0;
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    if (i == 0 || reduced[i] - reduced[i - 1] > 1e-9) ++count;
  }
  if (count > 1 && reduced.back() - reduced.front() > 180.0 - 1e-9) --count;
  return count;
}

std::vector<double> column(const HelicityScan& scan, double ScanPoint::*member) {
  std::vector<double> out;
  out.reserve(scan.points.size());
  for (const auto& p : scan.points) out.push_back(p.*member);
  return out;
}

HarmonicFitReport harmonic_fit(const HelicityScan& scan, Basis basis) {
  scan.validate();
  const Eigen::MatrixXd design = harmonic_design(scan, basis);
  const std::vector<double> y = column(scan, &ScanPoint::delta_theta_deg);
  const std::vector<double> sigma = column(scan, &ScanPoint::sigma_deg);
  const std::vector<std::string> names = basis_names(basis);
  const LinearFit fit = solve_weighted_least_squares(design, y, sigma, names);

  const std::size_t needed = static_cast<std::size_t>(design.cols()) + 1;
  if (distinct_angles(scan) < needed) {
    std::ostringstream msg;
    msg << "ill-posed fit: need at least " << needed << " distinct QWP angles (mod 180 deg), got "
        << distinct_angles(scan);
    throw IllPosedError(msg.str());
  }

  HarmonicFitReport report;
  report.points = scan.points.size();
  report.weighted = fit.weighted;
  report.residual_rms = fit.residual_rms();
  report.reduced_chi_square = fit.reduced_chi_square();
  report.orthogonal_sampling = is_orthogonal_sampling(scan);
  report.method = FitMethod::direct;
  // map fitted columns onto the C, L, F, D layout
  const std::vector<int> slots =
      basis == Basis::eq3 ? std::vector<int>{kIndexC, kIndexL, kIndexD} : std::vector<int>{kIndexC, kIndexL, kIndexF, kIndexD};
  std::array<double, 4> values{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < slots.size(); ++i) {
    values[static_cast<std::size_t>(slots[i])] = fit.params(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < slots.size(); ++j) {
      report.covariance(slots[i], slots[j]) = fit.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  report.coeffs = {values[kIndexC], values[kIndexL], values[kIndexF], values[kIndexD]};
  report.includes_sin6 = basis == Basis::extended;
  return report;
}

}  // namespace

// ---------------------------------------------------------------------------

PeakResult extract_peak(const TimeTrace& trace, const PeakConfig& config) {
  if (trace.points.empty()) throw DomainError("extract_peak: trace is empty");
  const double lo = config.window_center_ps - config.window_half_width_ps;
  const double hi = config.window_center_ps + config.window_half_width_ps;

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < trace.points.size(); ++i) {
    const auto& p = trace.points[i];
    if (p.delay_ps < lo || p.delay_ps > hi) continue;
    if (!best || std::abs(p.delta_theta_deg) > std::abs(trace.points[*best].delta_theta_deg)) best = i;
  }
  if (!best) throw DomainError("extract_peak: no samples inside the peak window");

  const std::size_t i = *best;
  const auto& centre = trace.points[i];
  if (centre.delta_theta_deg == 0.0) {
    if (config.zero_policy == ZeroPeakPolicy::error) throw DomainError("extract_peak: trace is zero inside the window");
    return {0.0, centre.delay_ps, true};
  }

  PeakResult result{centre.delta_theta_deg, centre.delay_ps, false};
  if (i == 0 || i + 1 >= trace.points.size()) return result;

  // Parabola through (t0,y0), (t1,y1), (t2,y2) in Newton form around t1.
  const double t0 = trace.points[i - 1].delay_ps, y0 = trace.points[i - 1].delta_theta_deg;
  const double t1 = centre.delay_ps, y1 = centre.delta_theta_deg;
  const double t2 = trace.points[i + 1].delay_ps, y2 = trace.points[i + 1].delta_theta_deg;
  const double d01 = (y1 - y0) / (t1 - t0);
  const double d12 = (y2 - y1) / (t2 - t1);
  const double curvature = (d12 - d01) / (t2 - t0);
  if (curvature == 0.0) return result;
  // y(t) = y1 + d01 (t - t1) + curvature (t - t1)(t - t0)
  const double slope_at_t1 = d01 + curvature * (t1 - t0);
  const double shift = -slope_at_t1 / (2.0 * curvature);
  // a vertex outside the bracket means the samples are not peak-shaped
  if (t1 + shift < t0 || t1 + shift > t2) return result;
  result.t_peak = t1 + shift;
  result.peak = y1 + slope_at_t1 * shift + curvature * shift * shift;
  return result;
}

// ---------------------------------------------------------------------------

std::string_view to_string(FitMethod method) { return method == FitMethod::direct ? "direct" : "two_stage"; }

double HarmonicFitReport::model(WavePlateSetting alpha) const { return signal_model_extended(alpha, coeffs); }

HarmonicFitReport fit_eq3(const HelicityScan& scan) { return harmonic_fit(scan, Basis::eq3); }

HarmonicFitReport fit_extended(const HelicityScan& scan) { return harmonic_fit(scan, Basis::extended); }

ResidualFit fit_residual_sin6(const HelicityScan& scan, const HarmonicFitReport& base) {
  scan.validate();
  const auto rows = static_cast<Eigen::Index>(scan.points.size());
  Eigen::MatrixXd design(rows, 1);
  std::vector<double> residual(scan.points.size());
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const auto& p = scan.points[i];
    design(static_cast<Eigen::Index>(i), 0) = std::sin(6 * deg_to_rad(p.alpha_deg));
    residual[i] = p.delta_theta_deg - signal_model_eq3(WavePlateSetting(p.alpha_deg), base.coeffs);
  }
  const std::vector<double> sigma = column(scan, &ScanPoint::sigma_deg);
  const std::array<std::string, 1> names = {kHarmonicNames[2]};
  // a lone column has no larger singular value to be small against
  if (design.norm() <= kRankTolerance * std::sqrt(static_cast<double>(rows))) {
    throw IllPosedError("ill-posed fit: design matrix rank 0 < 1 basis functions; deficient directions [" + names[0] +
                        ": 1]");
  }
  const LinearFit fit = solve_weighted_least_squares(design, residual, sigma, names);
  return {fit.params(0), std::sqrt(fit.covariance(0, 0))};
}

HarmonicFitReport fit_two_stage(const HelicityScan& scan) {
  HarmonicFitReport report = fit_eq3(scan);
  const ResidualFit residual = fit_residual_sin6(scan, report);
  report.coeffs.f = residual.f;
  report.covariance(kIndexF, kIndexF) = residual.f_sigma * residual.f_sigma;
  report.method = FitMethod::two_stage;
  report.includes_sin6 = true;

  double sum_sq = 0.0;
  double chi_square = 0.0;
  for (const auto& p : scan.points) {
    const double r = p.delta_theta_deg - report.model(WavePlateSetting(p.alpha_deg));
    sum_sq += r * r;
    chi_square += report.weighted ? r * r / (p.sigma_deg * p.sigma_deg) : r * r;
  }
  const auto n = static_cast<double>(scan.points.size());
  report.residual_rms = std::sqrt(sum_sq / n);
  report.reduced_chi_square = scan.points.size() > 4 ? chi_square / (n - 4.0) : 0.0;
  return report;
}

bool is_orthogonal_sampling(const HelicityScan& scan) {
  if (scan.points.empty()) return false;
  const Eigen::MatrixXd a = harmonic_design(scan, Basis::extended);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(a.rows());
  const bool weighted =
      std::all_of(scan.points.begin(), scan.points.end(), [](const ScanPoint& p) { return p.sigma_deg > 0.0; });
  if (weighted) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double s = scan.points[static_cast<std::size_t>(i)].sigma_deg;
      w(i) = 1.0 / (s * s);
    }
  }
  const Eigen::Matrix4d gram = a.transpose() * w.asDiagonal() * a;
  for (int i = 0; i < 4; ++i) {
    if (gram(i, i) <= 0.0) return false;
    for (int j = i + 1; j < 4; ++j) {
      if (std::abs(gram(i, j)) > 1e-10 * std::sqrt(gram(i, i) * gram(j, j))) return false;
    }
  }
  return true;
}

std::array<double, 4> harmonic_projection(std::span<const double> alpha_grid, std::span<const double> values) {
  if (alpha_grid.size() != values.size() || alpha_grid.empty()) {
    throw DomainError("harmonic_projection: grid and values must be nonempty and equal length");
  }
  std::array<double, 4> dot{}, norm{};
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    const double x = deg_to_rad(alpha_grid[i]);
    const std::array<double, 4> b = {std::sin(2 * x), std::sin(4 * x), std::sin(6 * x), 1.0};
    for (std::size_t k = 0; k < 4; ++k) {
      dot[k] += values[i] * b[k];
      norm[k] += b[k] * b[k];
    }
  }
  std::array<double, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) {
    if (norm[k] == 0.0) throw IllPosedError("harmonic_projection: basis function " + kHarmonicNames[k] + " vanishes on grid");
    out[k] = dot[k] / norm[k];
  }
  return out;
}

HelicityScan helicity_reversed(const HelicityScan& scan) {
  HelicityScan out = scan;
  for (auto& p : out.points) p.alpha_deg = WavePlateSetting(p.alpha_deg + 90.0).degrees();
  return out;
}

// ---------------------------------------------------------------------------

ScalingFitReport fit_scaling(const FluenceSeries& series, const ScalingConfig& config) {
  series.validate();
  if (series.entries.size() < 3) throw DomainError("fit_scaling: need at least 3 fluence points");

  const auto rows = static_cast<Eigen::Index>(series.entries.size());
  std::vector<double> y, sigma;
  for (const auto& e : series.entries) {
    y.push_back(e.value);
    sigma.push_back(e.sigma);
  }

  ScalingFitReport report;
  for (ScalingLaw law : {ScalingLaw::linear, ScalingLaw::quadratic}) {
    const Eigen::Index cols = config.intercept ? 2 : 1;
    Eigen::MatrixXd design(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double fluence = series.entries[static_cast<std::size_t>(i)].fluence;
      design(i, 0) = law == ScalingLaw::linear ? fluence : fluence * fluence;
      if (config.intercept) design(i, 1) = 1.0;
    }
    const std::vector<std::string> names = {law == ScalingLaw::linear ? "I" : "I^2", "1"};
    const LinearFit fit = solve_weighted_least_squares(design, y, sigma, std::span(names).first(static_cast<std::size_t>(cols)));
    LawFit law_fit;
    law_fit.coefficient = fit.params(0);
    law_fit.coefficient_sigma = std::sqrt(fit.covariance(0, 0));
    if (config.intercept) {
      law_fit.intercept = fit.params(1);
      law_fit.intercept_sigma = std::sqrt(fit.covariance(1, 1));
    }
    law_fit.reduced_chi_square = fit.reduced_chi_square();
    report.per_law[law] = law_fit;
  }

  const double lin = report.per_law[ScalingLaw::linear].reduced_chi_square;
  const double quad = report.per_law[ScalingLaw::quadratic].reduced_chi_square;
  report.selected = quad < lin ? ScalingLaw::quadratic : ScalingLaw::linear;
  report.coefficient = report.per_law[report.selected].coefficient;
  report.coefficient_sigma = report.per_law[report.selected].coefficient_sigma;
  return report;
}

}  // namespace nvkerr
