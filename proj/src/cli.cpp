#include "tconn/cli.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tconn/axioms.hpp"
#include "tconn/dsl.hpp"
#include "tconn/error.hpp"
#include "tconn/geometry.hpp"

namespace tconn::cli {

namespace {

using nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kCommands = {"check",          "curvature", "torsion",   "bianchi", "decompose",
                                            "almost-complex", "transport", "axioms"};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void need_args(const RunConfig& cfg, std::size_t n, const char* usage) {
  if (cfg.args.size() != n) throw UsageError(std::string("usage: ") + usage);
}

ordered_json numbers(const std::vector<double>& xs) {
  auto out = ordered_json::array();
  for (double x : xs) out.push_back(x);
  return out;
}

std::string num(double v) { return std::isfinite(v) ? format_number(v) : (std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf")); }

struct Outcome {
  Report report;
  ordered_json extra = ordered_json::object();
  std::string csv;  // replaces the item table when set
};

const dsl::ConnectionValue& connection_arg(const dsl::Program& p, const std::string& name) {
  auto k = p.kind_of(name);
  if (!k) throw Error(Errc::UnknownIdentifier, "no object named '" + name + "'");
  if (*k != "connection") throw Error(Errc::UnknownIdentifier, "'" + name + "' is a " + *k + ", not a connection");
  return p.connection(name);
}

const VerticalConnection& vertical_of(const dsl::ConnectionValue& c, const std::string& name) {
  if (!c.vertical) throw Error(Errc::PreconditionFailed, name + " has no vertical part");
  return *c.vertical;
}

Connection full_of(const dsl::ConnectionValue& c, const std::string& name) {
  auto f = c.full();
  if (!f) throw Error(Errc::PreconditionFailed, name + " needs both a vertical and a horizontal part");
  return *f;
}

Outcome check(const dsl::Program& p, const std::string& name, Sampler& s, double tol) {
  auto k = p.kind_of(name);
  if (!k) throw Error(Errc::UnknownIdentifier, "no object named '" + name + "'");
  Outcome o;
  if (*k == "bundle") {
    const auto& b = p.bundle(name);
    o.report = check_bundle(b, s, tol);
  } else if (*k == "connection") {
    const auto& c = p.connection(name);
    if (c.vertical) {
      o.report.append(check_vertical(*c.vertical, s, tol), "vertical: ");
      o.report.append(check_finsler(vertical_to_finsler(*c.vertical), s, tol), "finsler: ");
    }
    if (c.horizontal) o.report.append(check_horizontal(*c.horizontal, s, tol), "horizontal: ");
    if (auto f = c.full()) o.report.append(check_connection(*f, s, tol), "connection: ");
  } else {
    throw Error(Errc::UnknownIdentifier, "check needs a bundle or connection, '" + name + "' is a " + *k);
  }
  return o;
}

Outcome decompose_cmd(const Connection& c, Sampler& s) {
  Outcome o;
  const auto& b = c.bundle();
  auto round = compose(decomposition_map(c), reconstruction_map(c));
  o.report.items.push_back(equation_item("reconstruct decompose = 1", round, identity_map(b.TE->dim), s.points(b.TE)));
  return o;
}

// Orthonormal frame of the fibre at the base point for tangent bundles of 2- or 3-dimensional ambient spaces.
std::optional<std::pair<std::vector<double>, std::vector<double>>> frame_for(const DifferentialBundle& b,
                                                                               const std::vector<double>& e0) {
  if (!b.is_affine()) return std::nullopt;
  const std::size_t d = b.dM();
  std::vector<double> y(e0.begin(), e0.begin() + static_cast<std::ptrdiff_t>(d));
  std::vector<double> x(e0.begin() + static_cast<std::ptrdiff_t>(d), e0.end());
  double n = 0.0;
  for (double v : y) n += v * v;
  n = std::sqrt(n);
  if (n == 0.0) return std::nullopt;
  for (double& v : y) v /= n;
  if (d == 2) return std::pair{y, std::vector<double>{-y[1], y[0]}};
  if (d == 3) {
    std::vector<double> z{x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
    return std::pair{y, z};
  }
  return std::nullopt;
}

std::vector<double> parse_point(const dsl::Program& p, const std::string& arg) {
  if (p.kind_of(arg) == std::optional<std::string>("point")) return p.point(arg).coords;
  if (p.kind_of(arg)) throw Error(Errc::UnknownIdentifier, "'" + arg + "' is a " + *p.kind_of(arg) + ", not a point");
  std::vector<double> out;
  std::stringstream ss(arg);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(Errc::UnknownIdentifier, "'" + arg + "' is neither a point name nor a comma-separated vector");
    }
  }
  return out;
}

Outcome transport_cmd(const dsl::Program& p, const RunConfig& cfg) {
  need_args(cfg, 3, "transport <connection> <curve> <e0>");
  const auto& conn_name = cfg.args[0];
  auto c = full_of(connection_arg(p, conn_name), conn_name);
  auto ck = p.kind_of(cfg.args[1]);
  if (ck != std::optional<std::string>("curve"))
    throw Error(Errc::UnknownIdentifier, "'" + cfg.args[1] + "' is not a curve");
  const auto& curve = p.curve(cfg.args[1]);
  auto e0 = parse_point(p, cfg.args[2]);
  SolveOptions opt{cfg.euler ? Method::Euler : Method::RK4, cfg.reproject};
  auto res = parallel_transport(c, curve.map, curve.interval, e0, cfg.steps, opt);

  Outcome o;
  o.report = res.conditions;
  o.extra["steps"] = cfg.steps;
  o.extra["method"] = method_name(opt.method);
  o.extra["reprojected"] = cfg.reproject;
  o.extra["final"] = numbers(res.final_e);
  const auto a = curve.map(std::vector<double>{curve.interval.a});
  const auto b = curve.map(std::vector<double>{curve.interval.b});
  if (max_abs_diff(a, b) <= 1e-9) {
    o.extra["return_error"] = max_abs_diff(res.final_e, e0);
    if (auto fr = frame_for(c.bundle(), e0)) {
      double a1 = 0.0, a2 = 0.0;
      for (std::size_t i = 0; i < fr->first.size(); ++i) {
        a1 += res.final_e[i] * fr->first[i];
        a2 += res.final_e[i] * fr->second[i];
      }
      o.extra["holonomy_angle"] = std::atan2(a2, a1);
    }
  }

  const auto& bundle = c.bundle();
  std::ostringstream csv;
  csv << "t";
  for (std::size_t i = 0; i < bundle.dM(); ++i) csv << ",base" << i;
  for (std::size_t i = 0; i < bundle.dE(); ++i) csv << ",e" << i;
  csv << ",defect\n";
  for (const auto& n : res.trajectory.nodes) {
    std::vector<double> e(n.x.begin() + 1, n.x.end());
    csv << num(n.t);
    for (double v : bundle.q(e)) csv << "," << num(v);
    for (double v : e) csv << "," << num(v);
    csv << "," << num(n.defect) << "\n";
  }
  o.csv = csv.str();
  return o;
}

Outcome execute(const dsl::Program& p, const RunConfig& cfg) {
  Sampler s(Sampling{cfg.samples, cfg.seed});
  const auto& cmd = cfg.command;
  if (cmd == "axioms") {
    need_args(cfg, 0, "axioms");
    std::vector<SmoothMap> maps;
    for (const auto& [kind, name] : p.names())
      if (kind == "map") maps.push_back(p.map(name).map.named(name));
    Outcome o;
    o.report = tangent_axioms(maps, cfg.seed, cfg.samples, cfg.tol);
    return o;
  }
  if (cmd == "transport") return transport_cmd(p, cfg);
  if (cmd == "check") {
    need_args(cfg, 1, "check <name>");
    return check(p, cfg.args[0], s, cfg.tol);
  }
  need_args(cfg, 1, (cmd + " <connection>").c_str());
  const auto& name = cfg.args[0];
  const auto& c = connection_arg(p, name);
  Outcome o;
  if (cmd == "curvature") o.report = flatness_report(vertical_of(c, name), s, cfg.tol);
  else if (cmd == "torsion") o.report = torsion_report(vertical_of(c, name), s, cfg.tol);
  else if (cmd == "bianchi") o.report = bianchi(vertical_of(c, name), s, cfg.tol, cfg.statement_variant);
  else if (cmd == "decompose") o = decompose_cmd(full_of(c, name), s);
  else if (cmd == "almost-complex") {
    auto f = full_of(c, name);
    o.report = almost_complex_report(f, s, cfg.tol);
    o.report.append(flip_equivariance(f, s, cfg.tol));
  }
  return o;
}

std::string render(const RunConfig& cfg, const Outcome& o, bool pass) {
  std::string title = cfg.command;
  for (const auto& a : cfg.args) title += " " + a;
  if (cfg.format == Format::Csv) {
    if (!o.csv.empty()) return o.csv;
    std::ostringstream out;
    out << "equation,max_residual,pass\n";
    for (const auto& it : o.report.items)
      out << '"' << it.equation << "\"," << (it.evaluable ? num(it.max_residual) : "") << ","
          << (o.report.item_pass(it) ? "true" : "false") << "\n";
    return out.str();
  }
  if (cfg.format == Format::Human) {
    std::ostringstream out;
    out << title << " (seed " << cfg.seed << ", samples " << cfg.samples << ", tol " << num(o.report.tol) << ")\n";
    for (const auto& it : o.report.items) {
      out << "  " << (!it.evaluable ? "n/a " : o.report.item_pass(it) ? "ok  " : "FAIL") << "  " << it.equation;
      if (it.evaluable) out << "  " << num(it.max_residual);
      if (!it.note.empty()) out << "  (" << it.note << ")";
      out << "\n";
    }
    for (const auto& [k, v] : o.extra.items()) out << "  " << k << ": " << v.dump() << "\n";
    out << (pass ? "PASS" : "FAIL") << "\n";
    return out.str();
  }
  ordered_json j;
  j["command"] = title;
  j["seed"] = cfg.seed;
  j["version"] = kVersion;
  j["samples"] = cfg.samples;
  j["tol"] = o.report.tol;
  auto items = ordered_json::array();
  for (const auto& it : o.report.items) {
    ordered_json e;
    e["equation"] = it.equation;
    e["max_residual"] = it.max_residual;
    e["worst_point"] = numbers(it.worst_point);
    if (it.threshold) e["threshold"] = *it.threshold;
    if (!it.evaluable) e["evaluable"] = false;
    if (!it.note.empty()) e["note"] = it.note;
    e["pass"] = o.report.item_pass(it);
    items.push_back(e);
  }
  j["items"] = items;
  for (const auto& [k, v] : o.extra.items()) j[k] = v;
  j["pass"] = pass;
  return j.dump(2) + "\n";
}

std::string listing(const dsl::Program& p, Format f) {
  if (f == Format::Json) {
    auto arr = ordered_json::array();
    for (const auto& [k, n] : p.names()) arr.push_back({{"kind", k}, {"name", n}});
    ordered_json j;
    j["objects"] = arr;
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  if (f == Format::Csv) out << "kind,name\n";
  for (const auto& [k, n] : p.names()) out << k << (f == Format::Csv ? "," : " ") << n << "\n";
  return out.str();
}

}  // namespace

const std::vector<std::string>& commands() { return kCommands; }

RunResult run(const RunConfig& cfg) {
  RunResult r;
  try {
    if (!(cfg.tol > 0.0)) throw UsageError("--tol must be positive");
    if (cfg.samples < 1) throw UsageError("--samples must be at least 1");
    if (cfg.steps < 1) throw UsageError("--steps must be at least 1");
    if (!cfg.list && std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end())
      throw UsageError("unknown command '" + cfg.command + "'");
    auto text = cfg.source.empty() ? read_file(cfg.input) : cfg.source;
    auto program = dsl::Program::from_text(text);
    if (cfg.list) {
      r.output = listing(program, cfg.format);
      return r;
    }
    auto o = execute(program, cfg);
    const bool pass = o.report.pass();
    r.output = render(cfg, o, pass);
    r.exit_code = pass ? 0 : 1;
  } catch (const UsageError& e) {
    r.exit_code = 2;
    r.error = e.what();
  } catch (const ParseError& e) {
    r.exit_code = 2;
    r.error = (cfg.source.empty() ? cfg.input + ":" : std::string()) + e.what();
  } catch (const Error& e) {
    const bool config = e.code() == Errc::UnknownIdentifier || e.code() == Errc::Config ||
                        e.code() == Errc::ParseError || e.code() == Errc::ArityMismatch;
    r.exit_code = config ? 2 : 1;
    r.error = e.what();
  }
  return r;
}

}  // namespace tconn::cli
