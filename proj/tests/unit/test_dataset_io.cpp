#include <doctest.h>

#include <cstring>
#include <random>
#include <string>

#include "nvkerr/dataset_io.hpp"
#include "nvkerr/error.hpp"

using namespace nvkerr;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::string parse_error_message(std::string_view text) {
  try {
    read_helicity_scan(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("format_number round-trips") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0), e(-30.0, 30.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(rng) * std::pow(10.0, e(rng));
    CHECK(same_bits(std::stod(format_number(x)), x));
  }
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(172.5) == "172.5");
  CHECK(format_number(5e-05) == "5e-05");
}

TEST_CASE("helicity scan round-trip in both formats") {
  const HelicityScan scan = synth_helicity_scan({1.9e-3, 5e-4, 8e-4, 1e-4}, default_alpha_grid(), {5e-5, 11});
  const json meta = {{"seed", 11}, {"note", "x"}};
  for (FileFormat f : {FileFormat::csv, FileFormat::json}) {
    const Loaded<HelicityScan> back = read_helicity_scan(write_helicity_scan(scan, meta, f));
    REQUIRE(back.data.points.size() == scan.points.size());
    CHECK(back.data.fluence == scan.fluence);
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
      CHECK(same_bits(back.data.points[i].alpha_deg, scan.points[i].alpha_deg));
      CHECK(same_bits(back.data.points[i].delta_theta_deg, scan.points[i].delta_theta_deg));
      CHECK(same_bits(back.data.points[i].sigma_deg, scan.points[i].sigma_deg));
    }
    CHECK(back.metadata.at("seed") == 11);
    CHECK(back.metadata.at("note") == "x");
    // writing the parsed dataset again gives the same bytes
    CHECK(write_helicity_scan(back.data, back.metadata, f) == write_helicity_scan(scan, back.metadata, f));
  }
}

TEST_CASE("fluence series round-trip") {
  const FluenceSeries s = synth_fluence_series({ScalingLaw::quadratic, 3e-7}, fluence_grid(8, 40, 9), {1e-5, 2}, 'F');
  for (FileFormat f : {FileFormat::csv, FileFormat::json}) {
    const auto back = read_fluence_series(write_fluence_series(s, json::object(), f));
    REQUIRE(back.data.entries.size() == 9);
    CHECK(back.data.coefficient_label == 'F');
    CHECK(back.data.generating_law.kind == ScalingLaw::quadratic);
    CHECK(back.data.generating_law.coefficient == 3e-7);
    for (std::size_t i = 0; i < 9; ++i) {
      CHECK(same_bits(back.data.entries[i].fluence, s.entries[i].fluence));
      CHECK(same_bits(back.data.entries[i].value, s.entries[i].value));
      CHECK(same_bits(back.data.entries[i].sigma, s.entries[i].sigma));
    }
  }
}

TEST_CASE("time trace round-trip") {
  const TimeTraceModel m = TimeTraceModel::instantaneous(1.9e-3, MaterialParams{});
  const TimeTrace t = synth_time_trace(m, delay_grid(-1.0, 2.0, 0.05), {2e-5, 3});
  for (FileFormat f : {FileFormat::csv, FileFormat::json}) {
    const auto back = read_time_trace(write_time_trace(t, json::object(), f));
    REQUIRE(back.data.points.size() == t.points.size());
    CHECK(back.data.model.peak == m.peak);
    CHECK(back.data.model.cross_correlation_fwhm == m.cross_correlation_fwhm);
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      CHECK(same_bits(back.data.points[i].delay_ps, t.points[i].delay_ps));
      CHECK(same_bits(back.data.points[i].delta_theta_deg, t.points[i].delta_theta_deg));
    }
  }
}

TEST_CASE("malformed CSV names the line") {
  const std::string head = "# {\"kind\":\"helicity_scan\"}\nalpha_deg,delta_theta_deg,sigma_deg\n";
  CHECK(parse_error_message(head + "0,1e-4,5e-5\n7.5,abc,5e-5\n").find("line 4") != std::string::npos);
  CHECK(parse_error_message(head + "0,1e-4\n").find("line 3") != std::string::npos);
  CHECK(parse_error_message(head + "0,1e-4,5e-5,9\n").find("line 3") != std::string::npos);
  CHECK(parse_error_message(head + "0,1e-4,-1\n").find("line 3") != std::string::npos);
  CHECK(parse_error_message("alpha,theta,sigma\n0,1,1\n").find("line 1") != std::string::npos);
  CHECK(parse_error_message("# {\"kind\":\n" + head).find("line 1") != std::string::npos);
  CHECK_THROWS_AS(read_helicity_scan(""), ParseError);
  CHECK_THROWS_AS(read_helicity_scan("{\"points\": 3}"), ParseError);
  CHECK_THROWS_AS(read_helicity_scan("{not json"), ParseError);
}

TEST_CASE("comments other than JSON metadata are ignored") {
  const std::string text =
      "# generated_at: 2020-01-01T00:00:00Z\n# {\"a\":1}\n# {\"b\":2}\n\nalpha_deg,delta_theta_deg,sigma_deg\n"
      "0,1e-4,5e-5\n\n45,2e-4,5e-5\n";
  const auto back = read_helicity_scan(text);
  CHECK(back.data.points.size() == 2);
  CHECK(back.metadata.at("a") == 1);
  CHECK(back.metadata.at("b") == 2);
}

TEST_CASE("file format names") {
  CHECK(file_format_from_string("csv") == FileFormat::csv);
  CHECK(file_format_from_string("json") == FileFormat::json);
  CHECK(to_string(FileFormat::json) == "json");
  CHECK_THROWS(file_format_from_string("xml"));
}
