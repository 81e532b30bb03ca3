#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nvkerr/analysis.hpp"
#include "nvkerr/cli.hpp"
#include "nvkerr/dataset_io.hpp"
#include "nvkerr/error.hpp"
#include "nvkerr/geometry.hpp"
#include "nvkerr/magnetometry.hpp"
#include "nvkerr/optomag.hpp"
#include "nvkerr/polarization.hpp"
#include "nvkerr/synthesis.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace nvkerr;

namespace {

HelicityScan make_scan(const std::vector<double>& alpha, const std::vector<double>& delta_theta,
                       std::optional<std::vector<double>> sigma, double fluence) {
  if (alpha.size() != delta_theta.size() || (sigma && sigma->size() != alpha.size())) {
    throw DomainError("alpha, delta_theta and sigma must have equal length");
  }
  HelicityScan scan;
  scan.fluence = fluence;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    scan.points.push_back({WavePlateSetting(alpha[i]).degrees(), delta_theta[i], sigma ? (*sigma)[i] : 0.0});
  }
  return scan;
}

py::dict report_dict(const ConsistencyReport& r) {
  return py::dict("n"_a = r.n, "computed_chi2"_a = r.computed_chi2, "chi2_ratio"_a = r.chi2_ratio,
                  "limit_from_quoted_chi2"_a = r.limit_from_quoted_chi2,
                  "limit_from_computed_chi2"_a = r.limit_from_computed_chi2, "limit_ratio"_a = r.limit_ratio,
                  "implied_n_from_chi2"_a = r.implied_n_from_chi2, "implied_n_from_limit"_a = r.implied_n_from_limit,
                  "chi2_within_factor_2"_a = r.chi2_within_factor_2,
                  "limit_within_factor_2"_a = r.limit_within_factor_2);
}

}  // namespace

PYBIND11_MODULE(_nvkerr, m) {
  m.doc() = "Helicity-resolved pump-probe Kerr rotation: models, fits and calculators";

  auto base = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<IllPosedError>(m, "IllPosedError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  (void)base;

  // polarization
  m.def("qwp_state", [](double alpha_deg, double intensity) {
    const JonesVector j = qwp_state(WavePlateSetting(alpha_deg), intensity);
    return py::make_tuple(j.ex, j.ey);
  }, "alpha_deg"_a, "intensity"_a = 1.0, "Jones vector (ex, ey) after a QWP at alpha acting on x-polarized light");
  m.def("stokes", [](double alpha_deg, double intensity) {
    const StokesVector s = stokes(qwp_state(WavePlateSetting(alpha_deg), intensity));
    return py::make_tuple(s.s0, s.s1, s.s2, s.s3);
  }, "alpha_deg"_a, "intensity"_a = 1.0);
  m.def("helicity_factor", [](double a) { return helicity_factor(WavePlateSetting(a)); }, "alpha_deg"_a);
  m.def("linear_anisotropy_factor", [](double a) { return linear_anisotropy_factor(WavePlateSetting(a)); },
        "alpha_deg"_a);

  // models
  py::class_<HarmonicCoefficients>(m, "HarmonicCoefficients")
      .def(py::init([](double c, double l, double f, double d) { return HarmonicCoefficients{c, l, f, d}; }),
           "C"_a = 0.0, "L"_a = 0.0, "F"_a = 0.0, "D"_a = 0.0)
      .def_readwrite("C", &HarmonicCoefficients::c)
      .def_readwrite("L", &HarmonicCoefficients::l)
      .def_readwrite("F", &HarmonicCoefficients::f)
      .def_readwrite("D", &HarmonicCoefficients::d)
      .def("__eq__", [](const HarmonicCoefficients& a, const HarmonicCoefficients& b) { return a == b; })
      .def("__repr__", [](const HarmonicCoefficients& c) {
        std::ostringstream s;
        s << "HarmonicCoefficients(C=" << c.c << ", L=" << c.l << ", F=" << c.f << ", D=" << c.d << ")";
        return s.str();
      });
  m.def("signal_model", [](double a, const HarmonicCoefficients& c) { return signal_model_extended(WavePlateSetting(a), c); },
        "alpha_deg"_a, "coeffs"_a);
  m.def("two_step_icme", [](double a, double amp) { return two_step_icme(WavePlateSetting(a), amp); }, "alpha_deg"_a,
        "amplitude"_a);

  // synthesis
  m.def("default_alpha_grid", &default_alpha_grid);
  m.def("derive_seed", &derive_seed, "base"_a, "stream"_a);
  m.attr("generator_name") = std::string(kGeneratorName);

  py::class_<HelicityScan>(m, "HelicityScan")
      .def(py::init(&make_scan), "alpha_deg"_a, "delta_theta_deg"_a, "sigma_deg"_a = py::none(), "fluence"_a = 29.0)
      .def_readwrite("fluence", &HelicityScan::fluence)
      .def_property_readonly("alpha_deg", [](const HelicityScan& s) {
        std::vector<double> v;
        for (const auto& p : s.points) v.push_back(p.alpha_deg);
        return v;
      })
      .def_property_readonly("delta_theta_deg", [](const HelicityScan& s) {
        std::vector<double> v;
        for (const auto& p : s.points) v.push_back(p.delta_theta_deg);
        return v;
      })
      .def_property_readonly("sigma_deg", [](const HelicityScan& s) {
        std::vector<double> v;
        for (const auto& p : s.points) v.push_back(p.sigma_deg);
        return v;
      })
      .def("__len__", [](const HelicityScan& s) { return s.points.size(); })
      .def("to_csv", [](const HelicityScan& s) { return write_helicity_scan(s, json::object(), FileFormat::csv); })
      .def_static("from_text", [](const std::string& text) { return read_helicity_scan(text).data; });

  m.def("synth_helicity_scan",
        [](const HarmonicCoefficients& c, std::optional<std::vector<double>> grid, double sigma, std::uint64_t seed,
           double fluence) {
          const std::vector<double> g = grid ? *grid : default_alpha_grid();
          return synth_helicity_scan(c, g, {sigma, seed}, fluence);
        },
        "coeffs"_a, "alpha_grid"_a = py::none(), "sigma"_a = 1e-6, "seed"_a = 0, "fluence"_a = 29.0);

  // analysis
  py::class_<HarmonicFitReport>(m, "HarmonicFitReport")
      .def_readonly("coeffs", &HarmonicFitReport::coeffs)
      .def_readonly("covariance", &HarmonicFitReport::covariance)
      .def_readonly("residual_rms", &HarmonicFitReport::residual_rms)
      .def_readonly("reduced_chi_square", &HarmonicFitReport::reduced_chi_square)
      .def_readonly("includes_sin6", &HarmonicFitReport::includes_sin6)
      .def_readonly("orthogonal_sampling", &HarmonicFitReport::orthogonal_sampling)
      .def_readonly("weighted", &HarmonicFitReport::weighted)
      .def_property_readonly("method", [](const HarmonicFitReport& r) { return std::string(to_string(r.method)); })
      .def_property_readonly("sigmas", [](const HarmonicFitReport& r) {
        return py::dict("C"_a = r.sigma(kIndexC), "L"_a = r.sigma(kIndexL), "F"_a = r.sigma(kIndexF),
                        "D"_a = r.sigma(kIndexD));
      })
      .def("model", [](const HarmonicFitReport& r, double a) { return r.model(WavePlateSetting(a)); }, "alpha_deg"_a);

  m.def("fit_eq3", &fit_eq3, "scan"_a);
  m.def("fit_extended", &fit_extended, "scan"_a);
  m.def("fit_two_stage", &fit_two_stage, "scan"_a);
  m.def("helicity_reversed", &helicity_reversed, "scan"_a);
  m.def("harmonic_projection", [](const std::vector<double>& grid, const std::vector<double>& values) {
    const auto p = harmonic_projection(grid, values);
    return py::dict("C"_a = p[kIndexC], "L"_a = p[kIndexL], "F"_a = p[kIndexF], "D"_a = p[kIndexD]);
  }, "alpha_deg"_a, "values"_a);

  m.def("fit_scaling",
        [](const std::vector<double>& fluence, const std::vector<double>& value, std::optional<std::vector<double>> sigma,
           bool intercept) {
          if (fluence.size() != value.size() || (sigma && sigma->size() != fluence.size())) {
            throw DomainError("fluence, value and sigma must have equal length");
          }
          FluenceSeries s;
          for (std::size_t i = 0; i < fluence.size(); ++i) s.entries.push_back({fluence[i], value[i], sigma ? (*sigma)[i] : 0.0});
          const ScalingFitReport r = fit_scaling(s, {intercept});
          py::dict per_law;
          for (const auto& [law, fit] : r.per_law) {
            per_law[py::str(std::string(to_string(law)))] =
                py::dict("coefficient"_a = fit.coefficient, "sigma"_a = fit.coefficient_sigma,
                         "intercept"_a = fit.intercept, "intercept_sigma"_a = fit.intercept_sigma,
                         "reduced_chi_square"_a = fit.reduced_chi_square);
          }
          return py::dict("selected"_a = std::string(to_string(r.selected)), "coefficient"_a = r.coefficient,
                          "coefficient_sigma"_a = r.coefficient_sigma, "per_law"_a = per_law);
        },
        "fluence"_a, "value"_a, "sigma"_a = py::none(), "intercept"_a = false);

  // geometry
  m.def("refraction_angle", [](double inc, double n_in, double n_out) { return refraction_angle({inc, n_out, n_in}); },
        "incidence_deg"_a = 20.0, "n_inside"_a = 2.41, "n_outside"_a = 1.0);
  m.def("transverse_field_fraction",
        [](double inc, double n_in, double n_out) { return transverse_field_fraction({inc, n_out, n_in}); },
        "incidence_deg"_a = 20.0, "n_inside"_a = 2.41, "n_outside"_a = 1.0);
  m.def("nv_projections", [](const Vec3& field) {
    const NvProjections p = nv_projections(normalized(field));
    return py::make_tuple(p.cosines, p.mean_abs);
  }, "field_direction"_a);

  // magnetometry
  m.def("chi2_from_rotation", &chi2_from_rotation, "delta_theta_deg"_a, "m_tesla"_a, "n"_a = 2.41);
  m.def("detection_limit", [](double chi2, double floor, double n) { return detection_limit(chi2, floor, n).magnitude; },
        "chi2"_a, "theta_floor_deg"_a = 1e-6, "n"_a = 2.41, "Detection limit in tesla");
  m.def("check_quoted_figures", [](double n) { return report_dict(check_quoted_figures(n)); }, "n"_a = 2.41);

  // command line
  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, "args"_a, "Runs the nvkerr command line in-process; returns (exit_code, stdout, stderr)");
  m.def("strip_timestamp", &cli::strip_timestamp);
}
