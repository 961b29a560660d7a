#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "pfaffian/error.hpp"
#include "pfaffian/report.hpp"

namespace py = pybind11;
using namespace pfaffian;

namespace {

std::string analyze_json(const std::string& text, std::uint64_t seed, int trials, int pieces, double horizon,
                         double step, std::size_t dmax, int levels, bool numeric) {
  AnalysisConfig c;
  c.seed = seed;
  c.trials = trials;
  c.pieces = pieces;
  c.horizon = horizon;
  c.step = step;
  c.dmax = dmax;
  c.levels = levels;
  c.numeric = numeric;
  const auto sys = parse_system(text);
  py::gil_scoped_release release;
  return to_json(analyze(sys, c)).dump();
}

std::string flag_json(const std::string& text, std::uint64_t seed) {
  const auto sys = parse_system(text);
  return flag_to_json(derived_flag(sys, seed), sys).dump();
}

py::tuple run_cli(const std::vector<std::string>& args, const std::string& stdin_text) {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli::run(args, in, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Invariant submanifolds of affine control systems";
  static py::exception<Error> error(m, "PfaffianError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });
  m.attr("REPORT_SCHEMA") = kReportSchema;
  m.def("analyze_json", &analyze_json, py::arg("text"), py::arg("seed") = 42, py::arg("trials") = 100,
        py::arg("pieces") = 10, py::arg("horizon") = 5.0, py::arg("step") = 1e-3, py::arg("dmax") = 3,
        py::arg("levels") = 5, py::arg("numeric") = true, "Full analysis; the report as a JSON string.");
  m.def("flag_json", &flag_json, py::arg("text"), py::arg("seed") = 42, "Derived flag as a JSON string.");
  m.def("render_text", [](const std::string& report) { return render_text(nlohmann::json::parse(report)); },
        py::arg("report"), "Text rendering of a report JSON string.");
  m.def("print_system", [](const std::string& text) { return print_system(parse_system(text)); }, py::arg("text"),
        "Canonical form of a system description.");
  m.def("run_cli", &run_cli, py::arg("args"), py::arg("stdin") = "",
        "Runs the command-line front end; returns (exit code, stdout, stderr).");
}
