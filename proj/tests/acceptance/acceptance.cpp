// Acceptance criteria. One line per criterion; exit status 1 if any fails.
// Usage: acceptance [criterion ids...]

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "helpers.hpp"
#include "tconn/axioms.hpp"
#include "tconn/dsl.hpp"
#include "tconn/error.hpp"
#include "tconn/geometry.hpp"
#include "tconn/transport.hpp"

using namespace tconn;
using testing::diff;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

// Tolerances.
constexpr double kAxiomTol = 1e-12;
constexpr double kIdentityTol = 1e-8;
constexpr double kUniquenessTol = 1e-10;
constexpr double kTorsionGap = 0.1;
constexpr double kRiemannTol = 1e-5;
constexpr double kDecomposeTol = 1e-9;
constexpr double kFlipUTol = 1e-12;
constexpr double kFlatTransportTol = 1e-10;
constexpr double kLoopTol = 1e-6;
constexpr double kConditionTol = 1e-6;
constexpr double kMinOrder = 3.5;
constexpr double kEulerGapTol = 1e-4;
constexpr int kEulerSteps = 1 << 20;

// Collects bounded quantities; fails if any bound is violated.
class Tally {
 public:
  void at_most(const std::string& what, double value, double bound) {
    record(what, value, value <= bound, "<=", bound);
  }
  void at_least(const std::string& what, double value, double bound) {
    record(what, value, value >= bound, ">=", bound);
  }
  void require(const std::string& what, bool ok) {
    ++checks_;
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool pass() const { return failures_.empty(); }
  std::string detail() const {
    std::ostringstream o;
    if (!failures_.empty()) {
      o << failures_.size() << "/" << checks_ << " failed: ";
      for (std::size_t i = 0; i < failures_.size() && i < 4; ++i) o << (i ? "; " : "") << failures_[i];
      if (failures_.size() > 4) o << "; ...";
    } else {
      o << checks_ << " checks";
      for (const auto& n : notes_) o << "; " << n;
    }
    return o.str();
  }

 private:
  void record(const std::string& what, double value, bool ok, const char* rel, double bound) {
    ++checks_;
    if (!ok) failures_.push_back(what + " = " + format_number(value) + " not " + rel + " " + format_number(bound));
  }
  int checks_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

double sup(const SmoothMap& f, const SmoothMap& g, const std::vector<std::vector<double>>& pts) {
  return equation_item("", f, g, pts).max_residual;
}

double worst(const Report& r) {
  double w = 0.0;
  for (const auto& it : r.items)
    if (it.evaluable) w = std::max(w, it.max_residual);
  return w;
}

// ---- connection zoo ----

using Gamma = std::function<double(int, int, int, const std::vector<double>&)>;

VerticalConnection flat(std::size_t n) { return christoffel_vertical(zero_christoffel(n)); }

ChristoffelData curved2() {
  std::vector<ExprPtr> g(8, ex::constant(0.0));
  g[0 * 4 + 1 * 2 + 1] = ex::var(0);
  return christoffel_data(2, g);
}
double curved2_gamma(int i, int j, int k, const std::vector<double>& x) {
  return (i == 0 && j == 1 && k == 1) ? x[0] : 0.0;
}

ChristoffelData symmetric2() {
  auto x0 = ex::var(0), x1 = ex::var(1);
  std::vector<ExprPtr> g(8, ex::constant(0.0));
  g[0] = ex::mul(x0, x1);
  g[1] = g[2] = ex::sin(x1);
  g[4 + 3] = ex::add(ex::mul(x0, x0), ex::constant(0.5));
  g[4 + 0] = ex::cos(x0);
  return christoffel_data(2, g);
}
double symmetric2_gamma(int i, int j, int k, const std::vector<double>& x) {
  if (i == 0 && j == 0 && k == 0) return x[0] * x[1];
  if (i == 0 && j + k == 1) return std::sin(x[1]);
  if (i == 1 && j == 1 && k == 1) return x[0] * x[0] + 0.5;
  if (i == 1 && j == 0 && k == 0) return std::cos(x[0]);
  return 0.0;
}

// Gamma^1_12 - Gamma^1_21 = 1 in one-based indices.
ChristoffelData asymmetric2() {
  std::vector<ExprPtr> g(8, ex::constant(0.0));
  g[1] = ex::constant(1.0);
  return christoffel_data(2, g);
}

struct Named {
  std::string name;
  VerticalConnection k;
};

std::vector<Named> vertical_suite() {
  auto x = ex::var(0);
  return {
      {"R1 psi=0", flat(1)},
      {"R1 psi=x", christoffel_vertical(christoffel_data(1, {x}))},
      {"R1 psi=1+sin x", christoffel_vertical(christoffel_data(1, {ex::add(ex::constant(1.0), ex::sin(x))}))},
      {"R2 psi=0", flat(2)},
      {"R2 curved", christoffel_vertical(curved2())},
      {"R2 symmetric", christoffel_vertical(symmetric2())},
      {"S2", sphere_vertical(2)},
  };
}

HorizontalConnection sphere_seed() {
  return retract_affine_horizontal(canonical_affine_connection(3).horizontal, sphere(2), identity_map(3),
                                   normalize_map(3));
}

// ---- classical oracles ----

// R^i_jkl = d_k G^i_lj - d_l G^i_kj + G^i_km G^m_lj - G^i_lm G^m_kj by central differences.
double riemann(const Gamma& G, int i, int j, int k, int l, std::vector<double> x) {
  const double h = 1e-5;
  auto d = [&](int a, int b, int c, int dir) {
    auto xp = x, xm = x;
    xp[dir] += h;
    xm[dir] -= h;
    return (G(a, b, c, xp) - G(a, b, c, xm)) / (2 * h);
  };
  double r = d(i, l, j, k) - d(i, k, j, l);
  for (int m = 0; m < 2; ++m) r += G(i, k, m, x) * G(m, l, j, x) - G(i, l, m, x) * G(m, k, j, x);
  return r;
}

SmoothMap const_field(double a, double b) {
  return expr_map(2, {ex::constant(a), ex::constant(b), ex::var(0), ex::var(1)});
}

SmoothMap field(std::vector<ExprPtr> top) {
  const int n = static_cast<int>(top.size());
  for (int i = 0; i < n; ++i) top.push_back(ex::var(i));
  return expr_map(static_cast<std::size_t>(n), std::move(top));
}

std::array<SmoothMap, 3> plane_fields() {
  auto x = ex::var(0), y = ex::var(1);
  return {field({ex::add(x, ex::mul(y, y)), ex::constant(1.0)}),
          field({ex::mul(x, y), ex::sub(x, ex::constant(2.0))}),
          field({ex::pow(y, 3), ex::add(ex::mul(x, x), y)})};
}

std::array<SmoothMap, 3> sphere_fields() {
  auto x = ex::var(0), y = ex::var(1), z = ex::var(2);
  return {field({ex::neg(y), x, ex::constant(0.0)}),
          field({ex::neg(ex::mul(z, x)), ex::neg(ex::mul(z, y)), ex::sub(ex::constant(1.0), ex::mul(z, z))}),
          field({ex::constant(0.0), ex::neg(ex::mul(z, x)), ex::mul(y, x)})};
}

SmoothMap latitude(double th) {
  auto t = ex::var(0);
  return expr_map(1, {ex::mul(ex::constant(std::sin(th)), ex::cos(t)), ex::mul(ex::constant(std::sin(th)), ex::sin(t)),
                      ex::constant(std::cos(th))});
}

// Levi-Civita transport on the unit sphere: V' = -(V . g') g, plain RK4.
std::vector<double> classical_latitude(double th, std::vector<double> V, int steps) {
  auto rhs = [th](double t, const std::vector<double>& y) {
    double s = std::sin(th);
    double g[3] = {s * std::cos(t), s * std::sin(t), std::cos(th)};
    double dg[3] = {-s * std::sin(t), s * std::cos(t), 0.0};
    double k = y[0] * dg[0] + y[1] * dg[1] + y[2] * dg[2];
    return std::vector<double>{-k * g[0], -k * g[1], -k * g[2]};
  };
  const double h = 2 * kPi / steps;
  for (int i = 0; i < steps; ++i) {
    double t = i * h;
    auto k1 = rhs(t, V);
    std::vector<double> y(3);
    for (int j = 0; j < 3; ++j) y[j] = V[j] + h / 2 * k1[j];
    auto k2 = rhs(t + h / 2, y);
    for (int j = 0; j < 3; ++j) y[j] = V[j] + h / 2 * k2[j];
    auto k3 = rhs(t + h / 2, y);
    for (int j = 0; j < 3; ++j) y[j] = V[j] + h * k3[j];
    auto k4 = rhs(t + h, y);
    for (int j = 0; j < 3; ++j) V[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
  }
  return V;
}

// ---- random DSL maps ----

std::string random_expr(Rng& rng, int in_dim, int depth) {
  if (depth == 0 || rng.integer(0, 3) == 0) {
    if (rng.integer(0, 2) == 0) return format_number(std::round(rng.uniform(-3.0, 3.0) * 4) / 4);
    return "x[" + std::to_string(rng.integer(0, in_dim - 1)) + "]";
  }
  auto sub = [&] { return random_expr(rng, in_dim, depth - 1); };
  switch (rng.integer(0, 7)) {
    case 0: return "(" + sub() + " + " + sub() + ")";
    case 1: return "(" + sub() + " - " + sub() + ")";
    case 2: return sub() + " * " + sub();
    case 3: return "sin(" + sub() + ")";
    case 4: return "cos(" + sub() + ")";
    case 5: return "exp(sin(" + sub() + "))";
    case 6: return sub() + " / (2 + " + sub() + " * " + sub() + ")";
    default: return "pow(" + sub() + ", 2)";
  }
}

std::string random_maps_source(std::uint64_t seed, int count) {
  Rng rng(seed);
  std::ostringstream o;
  for (int m = 0; m < count; ++m) {
    int n = rng.integer(1, 3), k = rng.integer(1, 3);
    o << "map f" << m << " : R(" << n << ") -> R(" << k << ") = (";
    for (int c = 0; c < k; ++c) o << (c ? ", " : "") << random_expr(rng, n, 3);
    o << ");\n";
  }
  return o.str();
}

// ---- processes ----

std::string quote(const std::string& s) { return "'" + s + "'"; }

int run_cli(const std::string& args, const std::string& out) {
  std::string cmd = quote(TCONN_CLI) + " " + args + " > " + quote(out) + " 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

const std::string kModels = std::string(TCONN_SOURCE_DIR) + "/models/examples.conn";

// ---- criteria ----

Tally axioms() {
  Tally t;
  auto prog = dsl::Program::from_text(random_maps_source(20240611, 10));
  std::vector<SmoothMap> maps;
  for (const auto& [kw, name] : prog.names()) maps.push_back(prog.map(name).map);
  t.at_least("random maps", static_cast<double>(maps.size()), 10);
  auto r = tangent_axioms(maps, 42, 64, kAxiomTol);
  for (const auto& it : r.items) t.at_most(it.equation, it.max_residual, kAxiomTol);
  t.note(std::to_string(r.items.size()) + " items, worst " + sci(worst(r)));
  return t;
}

Tally vertical() {
  Tally t;
  Sampler s;
  double w = 0.0;
  for (const auto& [name, k] : vertical_suite()) {
    auto r = check_vertical(k, s, kIdentityTol);
    for (const auto& it : r.items) t.at_most(name + " " + it.equation, it.max_residual, kIdentityTol);
    w = std::max(w, worst(r));
  }
  t.note("worst " + sci(w));
  return t;
}

Tally horizontal() {
  Tally t;
  Sampler s;
  double w = 0.0;
  std::vector<std::pair<std::string, Connection>> suite = {
      {"R1", canonical_affine_connection(1)},
      {"R2", canonical_affine_connection(2)},
      {"S2", sphere_connection(2)},
  };
  for (const auto& [name, c] : suite) {
    for (const auto& r : {check_horizontal(c.horizontal, s, kIdentityTol), check_connection(c, s, kIdentityTol)}) {
      for (const auto& it : r.items) t.at_most(name + " " + it.equation, it.max_residual, kIdentityTol);
      w = std::max(w, worst(r));
    }
  }
  t.note("worst " + sci(w));
  return t;
}

Tally finsler() {
  Tally t;
  Sampler s;
  double w = 0.0;
  for (const auto& [name, k] : vertical_suite()) {
    auto f = vertical_to_finsler(k);
    auto back = finsler_to_vertical(f);
    auto again = vertical_to_finsler(back);
    bool exact = true;
    for (const auto& p : s.points(k.bundle.TE)) exact = exact && back.K(p) == k.K(p) && again.R(p) == f.R(p);
    t.require(name + " round trip bitwise", exact);
    auto r = check_finsler(f, s, kIdentityTol);
    for (const auto& it : r.items) t.at_most(name + " " + it.equation, it.max_residual, kIdentityTol);
    w = std::max(w, worst(r));
  }

  // Every vertical connection on a differential object is the projection onto the tangent part.
  int passing = 0;
  for (std::size_t n : {1, 2}) {
    auto b = differential_object(n);
    auto canon = canonical_vertical_diff_object(n);
    std::vector<VerticalConnection> candidates = {canon, vertical_from_horizontal(canonical_horizontal_diff_object(n)).vertical};
    std::vector<ExprPtr> shifted, scaled, bent, mixed;
    for (std::size_t i = 0; i < n; ++i) {
      auto v = ex::var(static_cast<int>(i)), x = ex::var(static_cast<int>(n + i));
      shifted.push_back(ex::add(v, ex::mul(ex::constant(0.5), x)));
      scaled.push_back(ex::mul(ex::constant(2.0), v));
      bent.push_back(ex::add(v, ex::mul(v, x)));
      mixed.push_back(ex::add(v, ex::var(static_cast<int>((i + 1) % n))));
    }
    for (auto* e : {&shifted, &scaled, &bent, &mixed}) candidates.push_back({b, expr_map(2 * n, *e)});
    for (const auto& k : candidates) {
      if (!check_vertical(k, s, kIdentityTol).pass()) continue;
      ++passing;
      t.at_most("diff object R^" + std::to_string(n) + " uniqueness", sup(k.K, canon.K, s.points(b.TE)),
                kUniquenessTol);
    }
  }
  t.at_least("passing differential-object candidates", passing, 4);
  t.note("worst " + sci(w));
  return t;
}

Tally torsion_curvature() {
  Tally t;
  Sampler s;
  const auto& plane = s.points(euclidean(2));
  auto pf = plane_fields();
  auto sf = sphere_fields();

  for (const auto& [name, k] : std::vector<Named>{{"symmetric", christoffel_vertical(symmetric2())},
                                                  {"sphere", sphere_vertical(2)}})
    t.at_most(name + " torsion", worst(torsion_report(k, s, kIdentityTol)), kIdentityTol);
  auto asym = christoffel_vertical(asymmetric2());
  double gap = worst(torsion_report(asym, s, kIdentityTol));
  t.at_least("asymmetric torsion", gap, kTorsionGap);
  // T(e0, e1) = Gamma^0_01 - Gamma^0_10 = 1 on constant fields.
  auto T01 = torsion_tensor(asym, const_field(1, 0), const_field(0, 1));
  double tmax = 0.0;
  for (const auto& p : plane) tmax = std::max(tmax, std::abs(T01(p)[0]));
  t.at_least("asymmetric T(e1, e2)", tmax, kTorsionGap);

  double w = 0.0;
  for (const auto& k : {christoffel_vertical(curved2()), christoffel_vertical(symmetric2()), asym}) {
    const bool free = is_torsion_free(k, s, kIdentityTol);
    for (int i = 0; i < 3; ++i) {
      const auto &a = pf[i], &b = pf[(i + 1) % 3], &c = pf[(i + 2) % 3];
      auto R = curvature_tensor(k, a, b, c);
      double r1 = sup(R, curvature_tensor_standard(k, a, b, c), plane);
      // The second-derivative form holds only without torsion.
      double r2 = free ? sup(R, curvature_tensor_second(k, a, b, c), plane) : 0.0;
      double r3 = sup(torsion_tensor(k, a, b), torsion_tensor_standard(k, a, b), plane);
      t.at_most("plane curvature standard", r1, kIdentityTol);
      t.at_most("plane curvature second", r2, kIdentityTol);
      t.at_most("plane torsion standard", r3, kIdentityTol);
      w = std::max({w, r1, r2, r3});
    }
  }
  auto sk = sphere_vertical(2);
  const auto& sp = s.points(sphere(2));
  for (int i = 0; i < 3; ++i) {
    const auto &a = sf[i], &b = sf[(i + 1) % 3], &c = sf[(i + 2) % 3];
    auto R = curvature_tensor(sk, a, b, c);
    double r1 = sup(R, curvature_tensor_standard(sk, a, b, c), sp);
    double r2 = sup(R, curvature_tensor_second(sk, a, b, c), sp);
    double r3 = sup(torsion_tensor(sk, a, b), torsion_tensor_standard(sk, a, b), sp);
    t.at_most("sphere curvature standard", r1, kIdentityTol);
    t.at_most("sphere curvature second", r2, kIdentityTol);
    t.at_most("sphere torsion standard", r3, kIdentityTol);
    w = std::max({w, r1, r2, r3});
  }

  double rw = 0.0;
  struct Case {
    ChristoffelData d;
    Gamma g;
  };
  const std::array<std::array<double, 2>, 3> vecs = {{{1, 0}, {0, 1}, {0.3, -0.7}}};
  for (const auto& c : {Case{curved2(), curved2_gamma}, Case{symmetric2(), symmetric2_gamma}}) {
    auto k = christoffel_vertical(c.d);
    for (const auto& X : vecs)
      for (const auto& Y : vecs)
        for (const auto& Z : vecs) {
          auto R = curvature_tensor(k, const_field(X[0], X[1]), const_field(Y[0], Y[1]), const_field(Z[0], Z[1]));
          for (const auto& p : plane) {
            auto got = R(p);
            for (int i = 0; i < 2; ++i) {
              double want = 0.0;
              for (int j = 0; j < 2; ++j)
                for (int kk = 0; kk < 2; ++kk)
                  for (int l = 0; l < 2; ++l) want += riemann(c.g, i, j, kk, l, p) * Z[j] * X[kk] * Y[l];
              rw = std::max(rw, std::abs(got[i] - want));
            }
          }
        }
  }
  t.at_most("Riemann vs finite differences", rw, kRiemannTol);
  t.note("torsion gap " + sci(gap) + ", identities " + sci(w) + ", Riemann " + sci(rw));
  return t;
}

Tally bianchi_identities() {
  Tally t;
  Sampler s;
  double w = 0.0;
  for (const auto& [name, k] : std::vector<Named>{{"sphere", sphere_vertical(2)},
                                                  {"symmetric", christoffel_vertical(symmetric2())}}) {
    t.require(name + " curved", !is_flat(k, s, kIdentityTol));
    auto r = bianchi(k, s, kIdentityTol);
    for (const auto& it : r.items) t.at_most(name + " " + it.equation, it.max_residual, kIdentityTol);
    w = std::max(w, worst(r));
    auto st = bianchi(k, s, kIdentityTol, true);
    bool flagged = false;
    for (const auto& it : st.items) flagged = flagged || !it.evaluable;
    t.require(name + " statement variant flagged", flagged);
    t.require(name + " statement variant report passes", st.pass());
    t.require(name + " both variants reported", st.items.size() > r.items.size());
  }
  t.note("worst " + sci(w));
  return t;
}

Tally interconversion() {
  Tally t;
  Sampler s;
  double w = 0.0;
  for (const auto& [name, c] : std::vector<std::pair<std::string, Connection>>{
           {"R1", canonical_affine_connection(1)},
           {"R2", canonical_affine_connection(2)},
           {"S2", sphere_connection(2)}}) {
    auto k = vertical_from_horizontal(c.horizontal);
    double r = sup(k.vertical.K, c.vertical.K, s.points(c.bundle().TE));
    t.at_most(name + " K from H", r, kIdentityTol);
    w = std::max(w, r);
  }

  auto flat2 = canonical_affine_connection(2);
  auto j2 = horizontal_from_vertical(christoffel_vertical(curved2()), flat2.horizontal).horizontal;
  auto k = christoffel_vertical(symmetric2());
  auto a = horizontal_from_vertical(k, flat2.horizontal), b = horizontal_from_vertical(k, j2);
  const auto& D2 = s.points(a.bundle().TM_x_E);
  t.at_least("R2 seeds differ", sup(flat2.horizontal.H, j2.H, D2), 0.01);
  double r2 = sup(a.horizontal.H, b.horizontal.H, D2);
  t.at_most("R2 H independent of seed", r2, kIdentityTol);

  std::vector<ExprPtr> g(27, ex::constant(0.0));
  g[0] = ex::var(1);
  g[13] = ex::constant(0.5);
  auto other = horizontal_from_vertical(christoffel_vertical(christoffel_data(3, g)),
                                        canonical_affine_connection(3).horizontal);
  auto j1 = sphere_seed();
  auto j3 = retract_affine_horizontal(other.horizontal, sphere(2), identity_map(3), normalize_map(3));
  auto h1 = horizontal_from_vertical(sphere_vertical(2), j1), h3 = horizontal_from_vertical(sphere_vertical(2), j3);
  const auto& D3 = s.points(h1.bundle().TM_x_E);
  t.at_least("S2 seeds differ", sup(j1.H, j3.H, D3), 0.01);
  double r3 = sup(h1.horizontal.H, h3.horizontal.H, D3);
  t.at_most("S2 H independent of seed", r3, kIdentityTol);
  t.note("K from H " + sci(w) + ", H seeds " + sci(std::max(r2, r3)));
  return t;
}

Tally decomposition() {
  Tally t;
  Sampler s;
  double w = 0.0;
  for (const auto& [name, c] : std::vector<std::pair<std::string, Connection>>{
           {"R1", canonical_affine_connection(1)},
           {"R2", canonical_affine_connection(2)},
           {"S2", sphere_connection(2)}}) {
    const auto& TE = s.points(c.bundle().TE);
    double r = sup(compose(decomposition_map(c), reconstruction_map(c)), identity_map(c.bundle().TE->dim), TE);
    t.at_most(name + " reconstruct decompose", r, kDecomposeTol);
    double pw = 0.0;
    for (const auto& p : TE) pw = std::max(pw, diff(reconstruct(c, decompose(c, p)), p));
    t.at_most(name + " pointwise", pw, kDecomposeTol);
    w = std::max({w, r, pw});
  }
  t.note("worst " + sci(w));
  return t;
}

Tally complex_structure() {
  Tally t;
  Sampler s;
  auto flat2 = canonical_affine_connection(2);
  double ff = 0.0;
  for (const auto& [name, c] : std::vector<std::pair<std::string, Connection>>{
           {"R1", canonical_affine_connection(1)}, {"R2", flat2}, {"S2", sphere_connection(2)}}) {
    double r = almost_complex_report(c, s, kIdentityTol).residual("FF = -1");
    t.at_most(name + " FF = -1", r, kIdentityTol);
    ff = std::max(ff, r);
  }

  std::vector<std::pair<std::string, Connection>> suite = {
      {"R1", canonical_affine_connection(1)},
      {"S2", sphere_connection(2)},
      {"curved", horizontal_from_vertical(christoffel_vertical(curved2()), flat2.horizontal)},
      {"symmetric", horizontal_from_vertical(christoffel_vertical(symmetric2()), flat2.horizontal)},
      {"asymmetric", horizontal_from_vertical(christoffel_vertical(asymmetric2()), flat2.horizontal)},
  };
  double cu = 0.0;
  int twisted = 0;
  for (const auto& [name, c] : suite) {
    auto r = flip_equivariance(c, s, kIdentityTol);
    double u = r.residual("cU = U tau");
    t.at_most(name + " cU = U tau", u, kFlipUTol);
    cu = std::max(cu, u);
    bool free = is_torsion_free(c.vertical, s, kIdentityTol);
    twisted += !free;
    t.require(name + " Hc = tau H iff torsion-free", (r.residual("Hc = tau H") <= kIdentityTol) == free);
  }
  t.at_least("torsion examples in the suite", twisted, 1);
  t.note("FF " + sci(ff) + ", cU " + sci(cu));
  return t;
}

Tally transport() {
  Tally t;
  auto tv = ex::var(0);
  auto flat = canonical_affine_connection(2);
  auto ellipse = expr_map(1, {ex::cos(tv), ex::mul(ex::constant(2.0), ex::sin(tv))});
  auto fr = parallel_transport(flat, ellipse, curve_object(-1, 3), {0.3, -0.7, 1.0, 0.0}, 400);
  double drift = 0.0;
  for (const auto& n : fr.trajectory.nodes) drift = std::max(drift, diff({n.x[1], n.x[2]}, {0.3, -0.7}));
  t.at_most("flat transport drift", drift, kFlatTransportTol);

  auto sc = sphere_connection(2);
  auto loop = curve_object(0, 2 * kPi);
  auto eq = expr_map(1, {ex::cos(tv), ex::sin(tv), ex::constant(0.0)});
  auto up = parallel_transport(sc, eq, loop, {0, 0, 1, 1, 0, 0}, 4096);
  double ret = diff(up.final_e, {0, 0, 1, 1, 0, 0});
  t.at_most("equator return", ret, kLoopTol);
  for (const auto& it : up.conditions.items) t.at_most("equator " + it.equation, it.max_residual, kConditionTol);

  const double th = kPi / 3;
  std::vector<double> x0 = {std::sin(th), 0.0, std::cos(th)}, u1 = {std::cos(th), 0.0, -std::sin(th)},
                      u2 = {0.0, 1.0, 0.0};
  auto e0 = u1;
  e0.insert(e0.end(), x0.begin(), x0.end());
  std::vector<std::vector<double>> runs;
  double cond = 0.0;
  for (int n : {512, 1024, 2048}) {
    auto r = parallel_transport(sc, latitude(th), loop, e0, n);
    for (const auto& it : r.conditions.items) {
      t.at_most("latitude N=" + std::to_string(n) + " " + it.equation, it.max_residual, kConditionTol);
      cond = std::max(cond, it.max_residual);
    }
    runs.push_back(r.final_e);
  }
  double order = empirical_order(runs[0], runs[1], runs[2]);
  t.at_least("RK4 empirical order", order, kMinOrder);

  auto frame = std::pair{u1, u2};
  auto rk = holonomy(sc, latitude(th), loop, e0, 2048, frame);
  auto oracle = classical_latitude(th, u1, 20000);
  double cl = diff({rk.returned[0], rk.returned[1], rk.returned[2]}, oracle);
  t.at_most("RK4 vs classical transport", cl, kLoopTol);
  auto eu = holonomy(sc, latitude(th), loop, e0, kEulerSteps, frame, {Method::Euler});
  double angle_gap = std::abs(std::remainder(*rk.angle - *eu.angle, 2 * kPi));
  double vec_gap = diff(rk.returned, eu.returned);
  t.at_most("RK4 vs Euler holonomy angle", angle_gap, kEulerGapTol);
  t.at_most("RK4 vs Euler returned vector", vec_gap, kEulerGapTol);
  t.note("flat " + sci(drift) + ", equator " + sci(ret) + ", order " + format_number(order) + ", conditions " +
         sci(cond) + ", Euler gap " + sci(std::max(angle_gap, vec_gap)));
  return t;
}

Tally parser() {
  Tally t;
  const fs::path root = fs::path(TCONN_SOURCE_DIR) / "tests/parser";
  int valid = 0, malformed = 0;
  for (const auto& entry : fs::directory_iterator(root / "valid")) {
    if (entry.path().extension() != ".conn") continue;
    ++valid;
    const std::string name = entry.path().stem().string();
    try {
      auto text = slurp(entry.path());
      auto ast = dsl::parse(text);
      auto printed = dsl::print(ast);
      auto golden = slurp(fs::path(entry.path()).replace_extension(".golden"));
      t.require(name + " prints golden", printed == golden);
      auto again = dsl::parse(printed);
      t.require(name + " round trip", dsl::equal(ast, again));
      t.require(name + " idempotent", dsl::print(again) == printed);
    } catch (const std::exception& e) {
      t.require(name + ": " + e.what(), false);
    }
  }
  for (const auto& entry : fs::directory_iterator(root / "malformed")) {
    if (entry.path().extension() != ".conn") continue;
    ++malformed;
    const std::string name = entry.path().stem().string();
    auto text = slurp(entry.path());
    int line = 0, col = 0;
    char code[64] = {};
    if (std::sscanf(text.c_str(), "# expect: %d:%d %63s", &line, &col, code) != 3) {
      t.require(name + " has an expectation", false);
      continue;
    }
    try {
      dsl::Program::from_text(text);
      t.require(name + " rejected", false);
    } catch (const ParseError& e) {
      t.require(name + " at " + std::to_string(line) + ":" + std::to_string(col) + " " + code,
                e.line() == line && e.column() == col && std::string(errc_name(e.code())) == code);
    }
  }
  t.at_least("valid inputs", valid, 20);
  t.at_least("malformed inputs", malformed, 10);

  const std::string tmp = (fs::path(TCONN_WORK_DIR) / "acceptance-exit.txt").string();
  const fs::path bad = root / "malformed/01_missing_semicolon.conn";
  struct Expect {
    std::string args;
    int code;
  };
  for (const auto& [args, code] : std::vector<Expect>{
           {quote(kModels) + " check flat_conn", 0},
           {quote(kModels) + " bianchi sphere_conn", 0},
           {quote(kModels) + " torsion twisted", 1},
           {quote(kModels) + " curvature sphere_conn", 1},
           {quote(kModels) + " bianchi twisted", 1},
           {quote(bad.string()) + " check flat_conn", 2},
           {quote(kModels) + " check nothing_here", 2},
           {quote(kModels) + " check flat_conn --format xml", 2},
           {quote(kModels) + " transport sphere_conn equator nowhere", 2},
       }) {
    int got = run_cli(args, tmp);
    t.require("exit " + std::to_string(code) + " for " + args.substr(args.find(' ') + 1) + " (got " +
                  std::to_string(got) + ")",
              got == code);
  }
  t.note(std::to_string(valid) + " valid, " + std::to_string(malformed) + " malformed");
  return t;
}

Tally determinism() {
  Tally t;
  std::vector<std::string> suite = {"--list", "--list --format csv", "axioms"};
  for (const char* c : {"flat_conn", "flat2", "flat3", "d1_conn", "k1", "k1_conn", "k2", "k2_conn", "twisted",
                        "sphere_conn", "sphere_pair", "eq_conn", "tr1", "ts2", "d1", "eq_ts2"})
    suite.push_back(std::string("check ") + c);
  for (const char* c : {"sphere_conn", "k2_conn", "twisted"}) {
    suite.push_back(std::string("curvature ") + c);
    suite.push_back(std::string("torsion ") + c);
  }
  for (const char* c : {"sphere_conn", "k2_conn"}) {
    suite.push_back(std::string("bianchi ") + c);
    suite.push_back(std::string("bianchi ") + c + " --statement-variant --format human");
    suite.push_back(std::string("decompose ") + c);
    suite.push_back(std::string("almost-complex ") + c);
  }
  suite.push_back("transport sphere_conn equator e0 --steps 1024");
  suite.push_back("transport sphere_conn latitude lat_e0 --steps 512 --format csv");
  suite.push_back("transport flat2 line line_e0 --steps 256 --euler --reproject");
  suite.push_back("check sphere_conn --samples 16 --seed 7 --format csv");

  const fs::path dir = fs::path(TCONN_WORK_DIR) / "acceptance-determinism";
  fs::remove_all(dir);
  for (const char* sub : {"a", "b"}) fs::create_directories(dir / sub);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    std::array<int, 2> codes{};
    std::array<std::string, 2> bytes;
    for (int r = 0; r < 2; ++r) {
      auto out = dir / (r ? "b" : "a") / (std::to_string(i) + ".out");
      codes[r] = run_cli(quote(kModels) + " " + suite[i], out.string());
      bytes[r] = slurp(out);
    }
    t.require(suite[i] + " runs", codes[0] == 0 || codes[0] == 1);
    t.require(suite[i] + " exit code stable", codes[0] == codes[1]);
    t.require(suite[i] + " byte-identical", !bytes[0].empty() && bytes[0] == bytes[1]);
  }
  t.note(std::to_string(suite.size()) + " reports");
  return t;
}

struct Criterion {
  int id;
  std::string name;
  Tally (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "tangent structure axioms", axioms},
      {2, "vertical connection axioms", vertical},
      {3, "horizontal connection and compatibility", horizontal},
      {4, "Finsler form and differential objects", finsler},
      {5, "torsion and curvature", torsion_curvature},
      {6, "Bianchi identities", bianchi_identities},
      {7, "vertical/horizontal interconversion", interconversion},
      {8, "decomposition of T(E)", decomposition},
      {9, "almost complex structure and flip", complex_structure},
      {10, "parallel transport", transport},
      {11, "parser and exit codes", parser},
      {12, "deterministic reports", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    auto start = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
      Tally t = c.run();
      pass = t.pass();
      detail = t.detail();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !pass;
    char time[32];
    std::snprintf(time, sizeof time, "%.1f s", secs);
    std::cout << (pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << detail << " (" << time
              << ")" << std::endl;
  }
  std::cout << (failed ? "FAIL" : "PASS") << "  acceptance: " << failed << " criteria failed" << std::endl;
  return failed ? 1 : 0;
}
