#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tconn/axioms.hpp"
#include "tconn/cli.hpp"
#include "tconn/dsl.hpp"
#include "tconn/error.hpp"

namespace py = pybind11;
using namespace tconn;

namespace {

py::dict report_dict(const Report& r) {
  py::list items;
  for (const auto& it : r.items) {
    py::dict d;
    d["equation"] = it.equation;
    d["max_residual"] = it.max_residual;
    d["worst_point"] = it.worst_point;
    d["threshold"] = it.threshold ? py::cast(*it.threshold) : py::none();
    d["evaluable"] = it.evaluable;
    d["note"] = it.note;
    d["pass"] = r.item_pass(it);
    items.append(d);
  }
  py::dict out;
  out["command"] = r.command;
  out["tol"] = r.tol;
  out["items"] = items;
  out["pass"] = r.pass();
  return out;
}

cli::Format format_of(const std::string& f) {
  if (f == "json") return cli::Format::Json;
  if (f == "csv") return cli::Format::Csv;
  if (f == "human") return cli::Format::Human;
  throw Error(Errc::Config, "unknown format '" + f + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = cli::kVersion;

  static py::exception<Error> error(m, "Error");
  static py::exception<ParseError> parse_error(m, "ParseError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      py::object exc = py::handle(parse_error.ptr())(e.what());
      exc.attr("code") = errc_name(e.code());
      exc.attr("line") = e.line();
      exc.attr("column") = e.column();
      exc.attr("expected") = e.expected();
      PyErr_SetObject(parse_error.ptr(), exc.ptr());
    } catch (const Error& e) {
      py::object exc = py::handle(error.ptr())(e.what());
      exc.attr("code") = errc_name(e.code());
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("commands", &cli::commands);

  m.def(
      "run",
      [](const std::string& command, const std::vector<std::string>& args, const std::string& source,
         const std::string& input, int samples, std::uint64_t seed, double tol, int steps, const std::string& format,
         bool list, bool statement_variant, bool reproject, bool euler) {
        cli::RunConfig cfg;
        cfg.command = command;
        cfg.args = args;
        cfg.source = source;
        cfg.input = input;
        cfg.samples = samples;
        cfg.seed = seed;
        cfg.tol = tol;
        cfg.steps = steps;
        cfg.format = format_of(format);
        cfg.list = list;
        cfg.statement_variant = statement_variant;
        cfg.reproject = reproject;
        cfg.euler = euler;
        cli::RunResult r;
        {
          py::gil_scoped_release release;
          r = cli::run(cfg);
        }
        return py::make_tuple(r.exit_code, r.output, r.error);
      },
      py::arg("command") = "", py::arg("args") = std::vector<std::string>{}, py::kw_only(), py::arg("source") = "",
      py::arg("input") = "", py::arg("samples") = 64, py::arg("seed") = 42, py::arg("tol") = 1e-8,
      py::arg("steps") = 4096, py::arg("format") = "json", py::arg("list") = false,
      py::arg("statement_variant") = false, py::arg("reproject") = false, py::arg("euler") = false);

  m.def("canonical", [](const std::string& text) { return dsl::print(dsl::parse(text)); });
  m.def("same_program", [](const std::string& a, const std::string& b) {
    return dsl::equal(dsl::parse(a), dsl::parse(b));
  });

  py::class_<dsl::Program>(m, "Program")
      .def(py::init([](const std::string& text) { return dsl::Program::from_text(text); }), py::arg("source"))
      .def("names", &dsl::Program::names)
      .def("kind_of", &dsl::Program::kind_of)
      .def("point", [](const dsl::Program& p, const std::string& n) { return p.point(n).coords; })
      .def("evaluate",
           [](const dsl::Program& p, const std::string& n, const std::vector<double>& x) { return p.map(n).map(x); })
      .def(
          "axioms",
          [](const dsl::Program& p, std::uint64_t seed, int towers, double tol) {
            std::vector<SmoothMap> maps;
            for (const auto& [kind, name] : p.names())
              if (kind == "map") maps.push_back(p.map(name).map.named(name));
            return report_dict(tangent_axioms(maps, seed, towers, tol));
          },
          py::arg("seed") = 42, py::arg("towers") = 64, py::arg("tol") = 1e-12)
      .def(
          "transport",
          [](const dsl::Program& p, const std::string& conn, const std::string& curve, std::vector<double> e0,
             int steps, bool euler, bool reproject) {
            const auto& cv = p.connection(conn);
            auto full = cv.full();
            if (!full) throw Error(Errc::PreconditionFailed, conn + " needs both a vertical and a horizontal part");
            const auto& c = p.curve(curve);
            TransportResult res;
            {
              py::gil_scoped_release release;
              res = parallel_transport(*full, c.map, c.interval, e0, steps,
                                       SolveOptions{euler ? Method::Euler : Method::RK4, reproject});
            }
            py::list t, states;
            for (const auto& n : res.trajectory.nodes) {
              t.append(n.t);
              states.append(std::vector<double>(n.x.begin() + 1, n.x.end()));
            }
            py::dict out;
            out["t"] = t;
            out["e"] = states;
            out["final"] = res.final_e;
            out["conditions"] = report_dict(res.conditions);
            return out;
          },
          py::arg("connection"), py::arg("curve"), py::arg("e0"), py::arg("steps") = 4096, py::arg("euler") = false,
          py::arg("reproject") = false);
}
