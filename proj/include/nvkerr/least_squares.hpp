#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nvkerr {

/// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kRankTolerance = 1e-10;

struct LinearFit {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  ///< (A^T W A)^-1, or s^2 (A^T A)^-1 when unweighted
  Eigen::VectorXd residuals;   ///< y - A params
  double chi_square = 0.0;     ///< sum w r^2 (w = 1 when unweighted)
  std::size_t dof = 0;
  bool weighted = false;

  double reduced_chi_square() const { return dof > 0 ? chi_square / static_cast<double>(dof) : 0.0; }
  double residual_rms() const;
};

/// Weighted linear least squares through the SVD of the row-scaled design
/// matrix. Rows are weighted by 1/sigma^2 when every sigma is positive;
/// otherwise all rows get unit weight and the covariance is scaled by the
/// residual variance. `basis_names` labels the columns in error messages.
///
/// Throws IllPosedError when the scaled design matrix has rank < columns,
/// naming the null-space directions in terms of the basis.
LinearFit solve_weighted_least_squares(const Eigen::MatrixXd& design, std::span<const double> y,
                                       std::span<const double> sigma,
                                       std::span<const std::string> basis_names);

}  // namespace nvkerr
