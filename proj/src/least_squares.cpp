#include "nvkerr/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nvkerr/error.hpp"

namespace nvkerr {

double LinearFit::residual_rms() const {
  if (residuals.size() == 0) return 0.0;
  return std::sqrt(residuals.squaredNorm() / static_cast<double>(residuals.size()));
}

namespace {

std::string describe_null_space(const Eigen::MatrixXd& v, const Eigen::VectorXd& singular, double cutoff,
                                std::span<const std::string> names) {
  std::ostringstream msg;
  bool first_dir = true;
  for (Eigen::Index k = 0; k < singular.size(); ++k) {
    if (singular(k) > cutoff) continue;
    msg << (first_dir ? "" : "; ") << "[";
    first_dir = false;
    bool first_term = true;
    for (Eigen::Index j = 0; j < v.rows(); ++j) {
      const double w = v(j, k);
      if (std::abs(w) < 1e-6) continue;
      msg << (first_term ? "" : ", ") << (static_cast<std::size_t>(j) < names.size() ? names[j] : "p" + std::to_string(j))
          << ": " << w;
      first_term = false;
    }
    msg << "]";
  }
  return msg.str();
}

}  // namespace

LinearFit solve_weighted_least_squares(const Eigen::MatrixXd& design, std::span<const double> y,
                                       std::span<const double> sigma,
                                       std::span<const std::string> basis_names) {
  const Eigen::Index rows = design.rows();
  const Eigen::Index cols = design.cols();
  if (static_cast<std::size_t>(rows) != y.size() || (!sigma.empty() && sigma.size() != y.size())) {
    throw std::invalid_argument("least squares: design, data and sigma sizes differ");
  }
  if (cols == 0) throw IllPosedError("least squares: no basis functions");

  const bool weighted =
      !sigma.empty() && std::all_of(sigma.begin(), sigma.end(), [](double s) { return s > 0.0; });

  Eigen::VectorXd sqrt_w = Eigen::VectorXd::Ones(rows);
  if (weighted) {
    for (Eigen::Index i = 0; i < rows; ++i) sqrt_w(i) = 1.0 / sigma[static_cast<std::size_t>(i)];
  }
  const Eigen::Map<const Eigen::VectorXd> b(y.data(), rows);
  const Eigen::MatrixXd a_w = sqrt_w.asDiagonal() * design;
  const Eigen::VectorXd b_w = sqrt_w.cwiseProduct(b);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  // a matrix with fewer rows than columns has fewer singular values
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(cols);
  padded.head(s.size()) = s;
  const double cutoff = kRankTolerance * (padded.size() > 0 ? padded.maxCoeff() : 0.0);
  const auto rank = (padded.array() > cutoff).count();
  if (rank < cols || padded.maxCoeff() == 0.0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> full(a_w, Eigen::ComputeFullV);
    std::ostringstream msg;
    msg << "ill-posed fit: design matrix rank " << rank << " < " << cols
        << " basis functions; deficient directions "
        << describe_null_space(full.matrixV(), padded, cutoff, basis_names);
    throw IllPosedError(msg.str());
  }

  const Eigen::MatrixXd& v = svd.matrixV();
  const Eigen::VectorXd inv_s = s.cwiseInverse();
  LinearFit fit;
  fit.weighted = weighted;
  fit.params = v * inv_s.asDiagonal() * (svd.matrixU().transpose() * b_w);
  fit.covariance = v * inv_s.cwiseAbs2().asDiagonal() * v.transpose();
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose());
  fit.residuals = b - design * fit.params;
  fit.chi_square = sqrt_w.cwiseProduct(fit.residuals).squaredNorm();
  fit.dof = rows > cols ? static_cast<std::size_t>(rows - cols) : 0;
  if (!weighted && fit.dof > 0) fit.covariance *= fit.reduced_chi_square();
  return fit;
}

}  // namespace nvkerr
