#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tconn/cli.hpp"

int main(int argc, char** argv) {
  using tconn::cli::Format;
  CLI::App app{"Check connections, curvature and parallel transport for maps written in the tconn DSL"};
  app.set_version_flag("--version", tconn::cli::kVersion);
  tconn::cli::RunConfig cfg;
  std::string format = "json", out;
  app.add_option("input", cfg.input, "DSL program")->required();
  app.add_option("command", cfg.command, "check | curvature | torsion | bianchi | decompose | almost-complex | transport | axioms");
  app.add_option("args", cfg.args, "object names and, for transport, <connection> <curve> <e0>");
  app.add_flag("--list", cfg.list, "list named objects in declaration order");
  app.add_option("--format", format, "json, csv or human")->check(CLI::IsMember({"json", "csv", "human"}));
  app.add_option("--out", out, "write the report here instead of stdout");
  app.add_option("--samples", cfg.samples, "sample points per check");
  app.add_option("--seed", cfg.seed, "sampling seed");
  app.add_option("--tol", cfg.tol, "pass tolerance");
  app.add_option("--steps", cfg.steps, "transport steps");
  app.add_flag("--statement-variant", cfg.statement_variant, "also report the printed form of the first Bianchi identity");
  app.add_flag("--reproject", cfg.reproject, "project transport states back onto the fibre after every step");
  app.add_flag("--euler", cfg.euler, "integrate transport with explicit Euler instead of RK4");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  cfg.format = format == "csv" ? Format::Csv : format == "human" ? Format::Human : Format::Json;
  if (!cfg.list && cfg.command.empty()) {
    std::cerr << "tconn: a command is required (or --list)\n";
    return 2;
  }

  auto r = tconn::cli::run(cfg);
  if (!r.error.empty()) std::cerr << "tconn: " << r.error << "\n";
  if (!r.output.empty()) {
    if (out.empty()) {
      std::cout << r.output;
    } else {
      std::ofstream f(out, std::ios::binary);
      if (!f) {
        std::cerr << "tconn: cannot write " << out << "\n";
        return 2;
      }
      f << r.output;
    }
  }
  return r.exit_code;
}
