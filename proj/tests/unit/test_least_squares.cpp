#include <doctest.h>

#include <random>
#include <string>

#include "nvkerr/error.hpp"
#include "nvkerr/least_squares.hpp"
#include "oracles.hpp"

using namespace nvkerr;

TEST_CASE("weighted solution matches normal equations") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::array<std::string, 3> names = {"x0", "x1", "x2"};
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 12;
    Eigen::MatrixXd a(n, 3);
    std::vector<std::vector<double>> rows;
    std::vector<double> y(n), sigma(n), w(n);
    for (int i = 0; i < n; ++i) {
      rows.push_back({u(rng), u(rng), 1.0});
      for (int j = 0; j < 3; ++j) a(i, j) = rows.back()[j];
      y[i] = u(rng);
      sigma[i] = 0.1 + 0.5 * (u(rng) + 1.0);
      w[i] = 1.0 / (sigma[i] * sigma[i]);
    }
    const LinearFit fit = solve_weighted_least_squares(a, y, sigma, names);
    const auto ref = oracle::normal_equations(rows, y, w);
    CHECK(fit.weighted);
    CHECK(fit.dof == 9);
    for (int j = 0; j < 3; ++j) CHECK(fit.params(j) == doctest::Approx(ref[j]).epsilon(1e-10));
    // covariance is the inverse weighted normal matrix
    const Eigen::MatrixXd normal = a.transpose() * Eigen::Map<Eigen::VectorXd>(w.data(), n).asDiagonal() * a;
    CHECK((fit.covariance * normal - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("unweighted fit scales covariance by residual variance") {
  Eigen::MatrixXd a(4, 1);
  a << 1, 2, 3, 4;
  const std::vector<double> y = {1.1, 1.9, 3.2, 3.9};
  const std::array<std::string, 1> names = {"x"};
  const LinearFit fit = solve_weighted_least_squares(a, y, std::vector<double>(4, 0.0), names);
  CHECK_FALSE(fit.weighted);
  const double slope = (1.1 + 3.8 + 9.6 + 15.6) / 30.0;
  CHECK(fit.params(0) == doctest::Approx(slope));
  double ss = 0.0;
  for (int i = 0; i < 4; ++i) ss += (y[i] - slope * (i + 1)) * (y[i] - slope * (i + 1));
  CHECK(fit.chi_square == doctest::Approx(ss));
  CHECK(fit.covariance(0, 0) == doctest::Approx(ss / 3.0 / 30.0));
}

TEST_CASE("rank deficiency names the null-space directions") {
  Eigen::MatrixXd a(5, 3);
  for (int i = 0; i < 5; ++i) {
    a(i, 0) = i;
    a(i, 1) = 2.0 * i;  // collinear with column 0
    a(i, 2) = 1.0;
  }
  const std::vector<double> y = {0, 1, 2, 3, 4};
  const std::array<std::string, 3> names = {"first", "second", "offset"};
  try {
    solve_weighted_least_squares(a, y, {}, names);
    FAIL("expected IllPosedError");
  } catch (const IllPosedError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("rank 2 < 3") != std::string::npos);
    CHECK(msg.find("first") != std::string::npos);
    CHECK(msg.find("second") != std::string::npos);
    CHECK(msg.find("offset") == std::string::npos);
  }
}

TEST_CASE("too few rows is ill-posed") {
  Eigen::MatrixXd a(1, 2);
  a << 1.0, 2.0;
  const std::array<std::string, 2> names = {"p", "q"};
  CHECK_THROWS_AS(solve_weighted_least_squares(a, std::vector<double>{1.0}, {}, names), IllPosedError);
}
