#include <doctest.h>

#include <cmath>

#include "nvkerr/error.hpp"
#include "nvkerr/synthesis.hpp"

using namespace nvkerr;

namespace {
const HarmonicCoefficients kReference{1.9e-3, 5e-4, 8.0e-4, 1e-4};
}

TEST_CASE("default alpha grid") {
  const auto g = default_alpha_grid();
  REQUIRE(g.size() == 24);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 172.5);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] - g[i - 1] == doctest::Approx(7.5));
}

TEST_CASE("synth_helicity_scan") {
  SUBCASE("constant scan") {
    const HelicityScan s = synth_helicity_scan({0, 0, 0, 0.5}, default_alpha_grid(), {0.0, 1});
    for (const auto& p : s.points) {
      CHECK(p.delta_theta_deg == 0.5);
      CHECK(p.sigma_deg == 0.0);
    }
  }
  SUBCASE("noiseless scan is the model curve") {
    const HelicityScan s = synth_helicity_scan(kReference, default_alpha_grid(), {0.0, 1});
    REQUIRE(s.points.size() == 24);
    for (const auto& p : s.points) {
      CHECK(p.delta_theta_deg == signal_model_extended(WavePlateSetting(p.alpha_deg), kReference));
    }
  }
  SUBCASE("same seed is bit-identical, different seed differs") {
    const auto a = synth_helicity_scan(kReference, default_alpha_grid(), {5e-5, 42});
    const auto b = synth_helicity_scan(kReference, default_alpha_grid(), {5e-5, 42});
    const auto c = synth_helicity_scan(kReference, default_alpha_grid(), {5e-5, 43});
    bool differs = false;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      CHECK(a.points[i].delta_theta_deg == b.points[i].delta_theta_deg);
      differs |= a.points[i].delta_theta_deg != c.points[i].delta_theta_deg;
    }
    CHECK(differs);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(synth_helicity_scan(kReference, std::vector<double>{}, {}), DomainError);
    CHECK_THROWS_AS(synth_helicity_scan(kReference, default_alpha_grid(), {-1.0, 0}), DomainError);
  }
  SUBCASE("angles are wrapped into [0, 360)") {
    const auto s = synth_helicity_scan(kReference, std::vector<double>{-45.0, 400.0}, {0.0, 0});
    CHECK(s.points[0].alpha_deg == doctest::Approx(315.0));
    CHECK(s.points[1].alpha_deg == doctest::Approx(40.0));
  }
}

TEST_CASE("noise generator sequence is fixed") {
  // first draw is Box-Muller applied to the raw, standard-specified engine output
  GaussianNoise g(7);
  const double first = g.standard();
  GaussianNoise h(7);
  CHECK(h.standard() == first);
  CHECK(std::isfinite(first));
  std::mt19937_64 reference(7);
  const double u1 = (static_cast<double>(reference() >> 11) + 1.0) / 9007199254740992.0;
  const double u2 = static_cast<double>(reference() >> 11) / 9007199254740992.0;
  CHECK(first == std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2));
}

TEST_CASE("noise statistics") {
  GaussianNoise g(123);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = g.standard();
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(n));
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("replicate mean converges to the model value") {
  const double sigma = 5e-5;
  const int replicates = 10000;
  const std::vector<double> grid = {22.5};
  double sum = 0.0;
  for (int r = 0; r < replicates; ++r) {
    sum += synth_helicity_scan(kReference, grid, {sigma, derive_seed(99, r)}).points[0].delta_theta_deg;
  }
  const double truth = signal_model_extended(WavePlateSetting(22.5), kReference);
  CHECK(std::abs(sum / replicates - truth) < 5.0 * sigma / std::sqrt(replicates));
}

TEST_CASE("derive_seed spreads streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(1, 5) == derive_seed(1, 5));
}

TEST_CASE("synth_fluence_series") {
  SUBCASE("linear point") {
    const auto s = synth_fluence_series({ScalingLaw::linear, 1e-4}, std::vector<double>{29.0}, {0.0, 0}, 'C');
    CHECK(s.entries[0].value == doctest::Approx(2.9e-3));
  }
  SUBCASE("quadratic point") {
    const auto s = synth_fluence_series({ScalingLaw::quadratic, 1e-6}, std::vector<double>{20.0}, {0.0, 0});
    CHECK(s.entries[0].value == doctest::Approx(4.0e-4));
  }
  SUBCASE("quadratic ratios") {
    const auto s = synth_fluence_series({ScalingLaw::quadratic, 3e-7}, std::vector<double>{8, 16, 24, 32, 40}, {0.0, 0});
    const double base = s.entries[0].value;
    const double expected[] = {1, 4, 9, 16, 25};
    for (std::size_t i = 0; i < 5; ++i) CHECK(s.entries[i].value / base == doctest::Approx(expected[i]));
    CHECK(s.generating_law.kind == ScalingLaw::quadratic);
    CHECK(s.generating_law.coefficient == 3e-7);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(synth_fluence_series({}, std::vector<double>{0.0, 10.0}, {0.0, 0}), DomainError);
    CHECK_THROWS_AS(synth_fluence_series({}, std::vector<double>{-5.0}, {0.0, 0}), DomainError);
    CHECK_THROWS_AS(synth_fluence_series({}, std::vector<double>{50.0}, {0.0, 0}), DomainError);
    CHECK_NOTHROW(synth_fluence_series({}, std::vector<double>{50.0}, {0.0, 0}, 'F', {1.0, 100.0}));
    CHECK_THROWS_AS(synth_fluence_series({}, std::vector<double>{20.0, 10.0}, {0.0, 0}), DomainError);
    CHECK_THROWS_AS(synth_fluence_series({}, std::vector<double>{20.0}, {0.0, 0}, 'X'), DomainError);
  }
}

TEST_CASE("fluence grid spans the requested range") {
  const auto g = fluence_grid(8.0, 40.0, 9);
  REQUIRE(g.size() == 9);
  CHECK(g.front() == 8.0);
  CHECK(g.back() == 40.0);
  CHECK(g[1] == doctest::Approx(12.0));
}

TEST_CASE("synth_time_trace") {
  const TimeTraceModel m = TimeTraceModel::instantaneous(1.9e-3, MaterialParams{});
  const auto grid = delay_grid(-0.5, 0.5, 0.01);
  SUBCASE("noiseless symmetric peak") {
    const TimeTrace t = synth_time_trace(m, grid, {0.0, 0});
    const std::size_t n = t.points.size();
    REQUIRE(n == 101);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(t.points[i].delta_theta_deg == doctest::Approx(t.points[n - 1 - i].delta_theta_deg).epsilon(1e-12));
    }
    CHECK(t.points[50].delta_theta_deg == doctest::Approx(1.9e-3));
  }
  SUBCASE("helicity flip mirrors the trace") {
    TimeTraceModel flipped = m;
    flipped.peak = -m.peak;
    const TimeTrace a = synth_time_trace(m, grid, {0.0, 0});
    const TimeTrace b = synth_time_trace(flipped, grid, {0.0, 0});
    for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].delta_theta_deg == -b.points[i].delta_theta_deg);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(synth_time_trace(m, std::vector<double>{}, {}), DomainError);
    CHECK_THROWS_AS(synth_time_trace(m, std::vector<double>{0.0, 20.0}, {}), DomainError);
    CHECK_NOTHROW(synth_time_trace(m, std::vector<double>{0.0, 15.0}, {}));
  }
}
