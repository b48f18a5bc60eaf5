#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flattri/cli/commands.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
  m.doc() = "flattri command runner";
  m.attr("__version__") = FLATTRI_VERSION;
  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        flattri::cli::RunResult r;
        {
          py::gil_scoped_release release;
          r = flattri::cli::run(args);
        }
        return py::make_tuple(r.exit_code, r.out, r.err);
      },
      py::arg("args"), "Run one flattri command line; returns (exit_code, stdout, stderr).");
}
