#include <doctest.h>

#include <cmath>
#include <random>

#include "nvkerr/error.hpp"
#include "nvkerr/magnetometry.hpp"

using namespace nvkerr;

TEST_CASE("chi2_from_rotation") {
  CHECK(chi2_from_rotation(8.0e-4, 1.0, 2.41) == doctest::Approx(1.928e-3).epsilon(1e-12));
  CHECK(chi2_from_rotation(0.0, 1.0, 2.41) == 0.0);
  CHECK(chi2_from_rotation(8e-4, 2.0, 2.41) == doctest::Approx(chi2_from_rotation(8e-4, 1.0, 2.41) / 4.0));
  CHECK_THROWS_AS(chi2_from_rotation(8e-4, 0.0, 2.41), DomainError);
  CHECK_THROWS_AS(chi2_from_rotation(-1e-4, 1.0, 2.41), DomainError);
}

TEST_CASE("detection_limit") {
  const FieldEstimate f = detection_limit(3.2e-3, 1e-6, 2.41);
  CHECK(f.magnitude == doctest::Approx(std::sqrt(2.41e-6 / 3.2e-3)).epsilon(1e-14));
  CHECK(f.magnitude * 1e3 == doctest::Approx(27.4).epsilon(0.05 / 27.4));
  CHECK(f.magnitude_oe == tesla_to_oersted(f.magnitude));
  CHECK(detection_limit(3.2e-3, 1e-30, 2.41).magnitude < 1e-13);
  CHECK(detection_limit(3.2e-3, 4e-6, 2.41).magnitude == doctest::Approx(2.0 * f.magnitude));
  CHECK_THROWS_AS(detection_limit(0.0, 1e-6, 2.41), DomainError);
  CHECK_THROWS_AS(detection_limit(-1.0, 1e-6, 2.41), DomainError);
  CHECK_THROWS_AS(detection_limit(3.2e-3, 0.0, 2.41), DomainError);
}

TEST_CASE("chi2 and detection limit are inverses") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> log_u(-8.0, 1.0), idx(1.0, 4.0);
  for (int i = 0; i < 500; ++i) {
    const double theta = std::pow(10.0, log_u(rng));
    const double m = std::pow(10.0, log_u(rng));
    const double n = idx(rng);
    const double back = detection_limit(chi2_from_rotation(theta, m, n), theta, n).magnitude;
    CHECK(std::abs(back - m) <= 1e-12 * m);
  }
}

TEST_CASE("ife_magnetization_scale") {
  CHECK(ife_magnetization_scale(1.9e-3).magnitude == doctest::Approx(1.0));
  CHECK(ife_magnetization_scale(1.9e-3).magnitude_oe == doctest::Approx(1.0e4));
  CHECK(ife_magnetization_scale(0.0).magnitude == 0.0);
  CHECK(ife_magnetization_scale(9.5e-4).magnitude == doctest::Approx(0.5));
  CHECK_THROWS_AS(ife_magnetization_scale(1e-3, {0.0, 1.0}), DomainError);
}

TEST_CASE("unit conversion") {
  CHECK(tesla_to_oersted(0.035) == doctest::Approx(350.0));
  for (double t : {1e-9, 0.035, 1.0, 12.5}) CHECK(oersted_to_tesla(tesla_to_oersted(t)) == doctest::Approx(t).epsilon(1e-15));
  CHECK_THROWS_AS(FieldEstimate::from_tesla(-1.0, ""), DomainError);
}

TEST_CASE("quoted figures comparison") {
  const ConsistencyReport r = check_quoted_figures(2.41);
  CHECK(r.computed_chi2 == doctest::Approx(1.928e-3));
  CHECK(r.chi2_within_factor_2);
  CHECK(r.limit_from_quoted_chi2 == doctest::Approx(0.02744).epsilon(1e-3));
  CHECK(r.limit_within_factor_2);
  CHECK(r.implied_n_from_chi2 == doctest::Approx(4.0));
  CHECK(r.implied_n_from_limit == doctest::Approx(3.92));
  // at the implied index the quoted chi' is reproduced exactly
  CHECK(check_quoted_figures(r.implied_n_from_chi2).chi2_ratio == doctest::Approx(1.0));
}
