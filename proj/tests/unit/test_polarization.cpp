#include <doctest.h>

#include <cmath>
#include <random>

#include "nvkerr/error.hpp"
#include "nvkerr/polarization.hpp"
#include "oracles.hpp"

using namespace nvkerr;

TEST_CASE("qwp_state matches the explicit Jones-matrix product") {
  for (double alpha = 0.0; alpha < 360.0; alpha += 7.0) {
    const JonesVector j = qwp_state(WavePlateSetting(alpha), 2.5);
    const oracle::Vec2 ref = oracle::qwp_output(alpha, 2.5);
    CHECK(std::abs(j.ex - ref[0]) < 1e-14);
    CHECK(std::abs(j.ey - ref[1]) < 1e-14);
  }
}

TEST_CASE("qwp_state labelled states") {
  SUBCASE("0 deg is linear") {
    const StokesVector s = stokes(qwp_state(WavePlateSetting(0.0)));
    CHECK(s.s3 == doctest::Approx(0.0));
    CHECK(s.s1 == doctest::Approx(1.0));
  }
  SUBCASE("45 deg is right circular") { CHECK(stokes(qwp_state(WavePlateSetting(45.0))).s3 == doctest::Approx(1.0)); }
  SUBCASE("135 deg is left circular") { CHECK(stokes(qwp_state(WavePlateSetting(135.0))).s3 == doctest::Approx(-1.0)); }
  SUBCASE("lossless") { CHECK(qwp_state(WavePlateSetting(33.0), 3.0).intensity() == doctest::Approx(3.0)); }
}

TEST_CASE("qwp_state rejects negative intensity") {
  CHECK_THROWS_AS(qwp_state(WavePlateSetting(10.0), -1.0), DomainError);
  CHECK_NOTHROW(qwp_state(WavePlateSetting(10.0), 0.0));
}

TEST_CASE("stokes of basis states") {
  const StokesVector p = stokes({1.0, 0.0});
  CHECK(p.s0 == 1.0);
  CHECK(p.s1 == 1.0);
  CHECK(p.s2 == 0.0);
  CHECK(p.s3 == 0.0);

  const double r = 1.0 / std::sqrt(2.0);
  const StokesVector c = stokes({complex(r, 0.0), complex(0.0, r)});
  CHECK(c.s0 == doctest::Approx(1.0));
  CHECK(std::abs(c.s1) < 1e-15);
  CHECK(std::abs(c.s2) < 1e-15);
  CHECK(c.s3 == doctest::Approx(1.0));
}

TEST_CASE("stokes agrees with ideal-analyzer measurements") {
  for (double alpha = 0.0; alpha < 180.0; alpha += 5.0) {
    const StokesVector s = stokes(qwp_state(WavePlateSetting(alpha)));
    const oracle::Stokes ref = oracle::stokes_by_analyzers(oracle::qwp_output(alpha));
    CHECK(std::abs(s.s0 - ref.s0) < 1e-12);
    CHECK(std::abs(s.s1 - ref.s1) < 1e-12);
    CHECK(std::abs(s.s2 - ref.s2) < 1e-12);
    CHECK(std::abs(s.s3 - ref.s3) < 1e-12);
  }
}

TEST_CASE("qwp 15 deg gives s3 = sin 30") {
  const oracle::Stokes ref = oracle::stokes_by_analyzers(oracle::qwp_output(15.0));
  CHECK(std::abs(ref.s3 - 0.5) < 1e-12);
  CHECK(std::abs(stokes(qwp_state(WavePlateSetting(15.0))).s3 - 0.5) < 1e-12);
}

TEST_CASE("stokes invariant under global phase") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const JonesVector j{{u(rng), u(rng)}, {u(rng), u(rng)}};
    const StokesVector a = stokes(j);
    const StokesVector b = stokes(j.with_global_phase(u(rng) * 3.0));
    CHECK(std::abs(a.s0 - b.s0) < 1e-12);
    CHECK(std::abs(a.s1 - b.s1) < 1e-12);
    CHECK(std::abs(a.s2 - b.s2) < 1e-12);
    CHECK(std::abs(a.s3 - b.s3) < 1e-12);
    // any pure Jones vector is fully polarized
    CHECK(std::abs(a.polarization_defect()) <= 1e-12 * a.s0 * a.s0);
  }
}

TEST_CASE("helicity and anisotropy factors") {
  CHECK(helicity_factor(WavePlateSetting(45.0)) == doctest::Approx(1.0));
  CHECK(std::abs(helicity_factor(WavePlateSetting(90.0))) < 1e-15);
  CHECK(helicity_factor(WavePlateSetting(30.0)) == doctest::Approx(0.8660254037844386).epsilon(1e-14));
  CHECK(linear_anisotropy_factor(WavePlateSetting(0.0)) == doctest::Approx(1.0));
  CHECK(linear_anisotropy_factor(WavePlateSetting(45.0)) == doctest::Approx(-1.0));
  CHECK(std::abs(linear_anisotropy_factor(WavePlateSetting(22.5))) < 1e-14);

  // the analyzer oracle gives 2 s1/s0 - 1 = -1 at 45 deg
  const oracle::Stokes ref = oracle::stokes_by_analyzers(oracle::qwp_output(45.0));
  CHECK(2.0 * ref.s1 / ref.s0 - 1.0 == doctest::Approx(-1.0));
}

TEST_CASE("factor identities over a 1 degree grid") {
  double worst_h = 0.0, worst_l = 0.0, worst_defect = 0.0, worst_flip = 0.0;
  for (int k = 0; k < 360; ++k) {
    const double a = k;
    const double x = oracle::rad(a);
    worst_h = std::max(worst_h, std::abs(helicity_factor(WavePlateSetting(a)) - std::sin(2 * x)));
    worst_l = std::max(worst_l, std::abs(linear_anisotropy_factor(WavePlateSetting(a)) - std::cos(4 * x)));
    const StokesVector s = stokes(qwp_state(WavePlateSetting(a)));
    worst_defect = std::max(worst_defect, s.polarization_defect() / (s.s0 * s.s0));
    worst_flip = std::max(worst_flip, std::abs(helicity_factor(WavePlateSetting(a + 90.0)) +
                                               helicity_factor(WavePlateSetting(a))));
  }
  CHECK(worst_h <= 1e-12);
  CHECK(worst_l <= 1e-12);
  CHECK(worst_defect <= 1e-12);
  CHECK(worst_flip <= 1e-12);
}

TEST_CASE("WavePlateSetting wraps into [0, 360)") {
  CHECK(WavePlateSetting(370.0).degrees() == doctest::Approx(10.0));
  CHECK(WavePlateSetting(-90.0).degrees() == doctest::Approx(270.0));
  CHECK(WavePlateSetting(360.0).degrees() == 0.0);
  CHECK(WavePlateSetting(-1e-18).degrees() < 360.0);
}
