#include "tconn/transport.hpp"

#include <cmath>

#include "tconn/error.hpp"

namespace tconn {

namespace {

std::vector<double> top_half(const std::vector<double>& v) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2)};
}

void axpy(std::vector<double>& y, double a, const std::vector<double>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

bool finite(const std::vector<double>& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

std::vector<double> step_once(const SmoothMap& x1, const std::vector<double>& x, double h, Method m) {
  auto f = [&](const std::vector<double>& y) { return top_half(x1(y)); };
  auto k1 = f(x);
  auto out = x;
  if (m == Method::Euler) {
    axpy(out, h, k1);
    return out;
  }
  auto y = x;
  axpy(y, h / 2, k1);
  auto k2 = f(y);
  y = x;
  axpy(y, h / 2, k2);
  auto k3 = f(y);
  y = x;
  axpy(y, h, k3);
  auto k4 = f(y);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

// Five-point derivative at node i of the uniform run n[lo, hi); one-sided stencils at the ends.
std::vector<double> derivative(const std::vector<TrajectoryNode>& n, std::size_t lo, std::size_t hi, std::size_t i,
                               std::size_t offset = 0) {
  const std::size_t N = hi - lo, d = n[i].x.size() - offset;
  std::vector<double> out(d, 0.0);
  if (N < 5) {
    std::size_t a = i == lo ? lo : i - 1, b = i + 1 < hi ? i + 1 : i;
    for (std::size_t k = 0; k < d; ++k) out[k] = (n[b].x[offset + k] - n[a].x[offset + k]) / (n[b].t - n[a].t);
    return out;
  }
  std::size_t s = i < lo + 2 ? lo : (i + 2 >= hi ? hi - 5 : i - 2);
  const double h = (n[s + 4].t - n[s].t) / 4;
  // Weights for a uniform grid, row = position of i within the stencil.
  static const double W[5][5] = {{-25, 48, -36, 16, -3},
                                 {-3, -10, 18, -6, 1},
                                 {1, -8, 0, 8, -1},
                                 {-1, 6, -18, 10, 3},
                                 {3, -16, 36, -48, 25}};
  const auto& w = W[i - s];
  for (std::size_t k = 0; k < d; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < 5; ++j) acc += w[j] * n[s + j].x[offset + k];
    out[k] = acc / (12 * h);
  }
  return out;
}

}  // namespace

SmoothMap CurveObject::c1() const {
  return expr_map(1, {ex::constant(1.0), ex::var(0)}, "c1");
}

CurveObject curve_object(double a, double b) {
  if (!(a <= 0.0 && 0.0 <= b) || !(a < b)) throw Error(Errc::Config, "curve object needs a <= 0 <= b and a < b");
  return {a, b};
}

const char* method_name(Method m) { return m == Method::RK4 ? "rk4" : "euler"; }

Report check_linear_system(const DynamicalSystem& d, const DifferentialBundle& m, const SmoothMap& b, Sampler& s,
                           double tol) {
  if (m.dE() != d.space->dim) throw Error(Errc::DimensionMismatch, "linear system: bundle total space is not M");
  const std::size_t dM = d.space->dim;
  Report r;
  r.command = "linear-system";
  r.subject = m.name;
  r.tol = tol;
  const auto& M = s.points(d.space);
  r.items.push_back(equation_item("lambda T(x1) = x1 T(lambda) c", compose(m.lambda, tangent(d.x1)),
                                  compose({d.x1, tangent(m.lambda), flip_map(dM, 2, 1, 2)}), M));
  r.items.push_back(equation_item("x1 T(m) = m b", compose(d.x1, tangent(m.q)), compose(m.q, b), M));
  return r;
}

Trajectory solve(const DynamicalSystem& d, const CurveObject& c, int steps, SolveOptions opt) {
  if (steps < 1) throw Error(Errc::Config, "solve: steps must be at least 1");
  if (d.x1.in_dim() != d.space->dim || d.x1.out_dim() != 2 * d.space->dim || d.x0.size() != d.space->dim)
    throw Error(Errc::DimensionMismatch, "solve: system does not fit its space");
  const double len = c.b - c.a;
  long fwd = c.b > 0 ? std::lround(steps * c.b / len) : 0;
  long back = c.a < 0 ? steps - fwd : 0;
  if (c.b > 0 && fwd == 0) fwd = 1;
  if (c.a < 0 && back == 0) back = 1;

  Trajectory tr;
  tr.method = opt.method;
  tr.step = len / steps;
  auto run = [&](long n, double end) {
    std::vector<TrajectoryNode> out;
    if (n == 0) return out;
    const double h = end / static_cast<double>(n);
    auto x = d.x0;
    for (long k = 1; k <= n; ++k) {
      x = step_once(d.x1, x, h, opt.method);
      if (opt.reproject) x = project(*d.space, std::move(x), 1);
      const double t = k == n ? end : h * static_cast<double>(k);
      if (!finite(x))
        throw Error(Errc::NonFiniteState, "solve: state is not finite at t = " + format_number(t) + " (node " +
                                              std::to_string(k) + ")");
      out.push_back({t, x, 0.0});
    }
    return out;
  };
  auto before = run(back, c.a);
  auto after = run(fwd, c.b);
  for (auto it = before.rbegin(); it != before.rend(); ++it) tr.nodes.push_back(std::move(*it));
  tr.origin = tr.nodes.size();
  tr.nodes.push_back({0.0, d.x0, 0.0});
  for (auto& n : after) tr.nodes.push_back(std::move(n));

  // Each side of the origin is a uniform grid.
  for (std::size_t i = 0; i < tr.nodes.size(); ++i) {
    const bool left = i < tr.origin;
    const std::size_t lo = left ? 0 : tr.origin, hi = left ? tr.origin + 1 : tr.nodes.size();
    auto dx = hi - lo >= 2 ? derivative(tr.nodes, lo, hi, i) : std::vector<double>(d.x0.size(), 0.0);
    tr.nodes[i].defect = max_abs_diff(dx, top_half(d.x1(tr.nodes[i].x)));
  }
  return tr;
}

SmoothMap transport_field(const Connection& c, const SmoothMap& gamma) {
  const auto& b = c.bundle();
  const std::size_t dE = b.dE(), n = 1 + dE;
  if (gamma.in_dim() != 1 || gamma.out_dim() != b.dM())
    throw Error(Errc::DimensionMismatch, "transport: curve must map the interval into the base");
  auto pi0 = projection(n, 0, 1), pi1 = projection(n, 1, dE);
  auto c1 = CurveObject{}.c1();
  auto velocity = compose({pi0, c1, tangent(gamma)});
  return tower_pair(1, {compose(pi0, c1), compose(pair({velocity, pi1}), c.horizontal.H)});
}

TransportResult parallel_transport(const Connection& c, const SmoothMap& gamma, const CurveObject& curve,
                                   const std::vector<double>& e0, int steps, SolveOptions opt, double tol) {
  const auto& b = c.bundle();
  if (e0.size() != b.dE()) throw Error(Errc::DimensionMismatch, "transport: e0 is not a point of E");
  auto start = gamma(std::vector<double>{0.0});
  double gap = max_abs_diff(b.q(e0), start);
  if (!(gap <= tol))
    throw Error(Errc::BasePointMismatch, "transport: e0 lies over a different point than gamma(0) (gap " +
                                             format_number(gap) + ")");
  auto state = fibre_product(euclidean(1, "C"), gamma, b.total, b.q, "C x_M E");
  DynamicalSystem sys{state, {}, transport_field(c, gamma)};
  sys.x0.push_back(0.0);
  sys.x0.insert(sys.x0.end(), e0.begin(), e0.end());

  TransportResult res;
  res.trajectory = solve(sys, curve, steps, opt);
  const auto& nodes = res.trajectory.nodes;
  auto e_of = [&](const std::vector<double>& x) { return std::vector<double>(x.begin() + 1, x.end()); };
  res.final_e = e_of(nodes.back().x);

  Report& r = res.conditions;
  r.command = opt.reproject ? "transport-reprojected" : "transport";
  r.subject = b.name;
  r.tol = 1e-6;
  ReportItem start_item{"(i) starts at e0", max_abs_diff(e_of(nodes[res.trajectory.origin].x), e0), e0, {}, true, {}};
  r.items.push_back(start_item);

  ReportItem above{"(ii) above gamma", 0.0, {}, {}, true, {}};
  ReportItem parallel{"(iii) nabla(c1, gamma_hat) = gamma 0", 0.0, {}, {}, true, {}};
  ReportItem fibre{"fibre membership", 0.0, {}, {}, true, {}};
  auto K = c.vertical.K;
  auto zero_over = compose(gamma, b.zero);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    std::vector<double> e = e_of(nodes[i].x), t{nodes[i].t};
    double ra = max_abs_diff(b.q(e), gamma(t));
    if (ra > above.max_residual) above = {above.equation, ra, nodes[i].x, {}, true, {}};
    double rf = constraint_residual(*b.total, e).residual;
    if (rf > fibre.max_residual) fibre = {fibre.equation, rf, nodes[i].x, {}, true, {}};
    const bool left = i < res.trajectory.origin;
    const std::size_t lo = left ? 0 : res.trajectory.origin, hi = left ? res.trajectory.origin + 1 : nodes.size();
    if (hi - lo < 5) continue;
    auto tangent_pt = derivative(nodes, lo, hi, i, 1);
    tangent_pt.insert(tangent_pt.end(), e.begin(), e.end());
    double rp = max_abs_diff(K(tangent_pt), zero_over(t));
    if (rp > parallel.max_residual) parallel = {parallel.equation, rp, nodes[i].x, {}, true, {}};
  }
  r.items.push_back(above);
  r.items.push_back(parallel);
  fibre.threshold = 1e-7;
  r.items.push_back(fibre);
  return res;
}

Holonomy holonomy(const Connection& c, const SmoothMap& loop, const CurveObject& curve, const std::vector<double>& e0,
                  int steps, const std::optional<std::pair<std::vector<double>, std::vector<double>>>& frame,
                  SolveOptions opt, double tol) {
  double gap = max_abs_diff(loop(std::vector<double>{curve.a}), loop(std::vector<double>{curve.b}));
  if (!(gap <= 1e-9)) throw Error(Errc::LoopNotClosed, "holonomy: loop ends differ by " + format_number(gap));
  Holonomy h;
  h.transport = parallel_transport(c, loop, curve, e0, steps, opt, tol);
  h.returned = h.transport.final_e;
  if (frame) {
    const auto& [u1, u2] = *frame;
    double a1 = 0.0, a2 = 0.0;
    for (std::size_t i = 0; i < u1.size() && i < h.returned.size(); ++i) {
      a1 += h.returned[i] * u1[i];
      a2 += h.returned[i] * u2[i];
    }
    h.angle = std::atan2(a2, a1);
  }
  return h;
}

double empirical_order(const std::vector<double>& yN, const std::vector<double>& y2N, const std::vector<double>& y4N) {
  return std::log2(max_abs_diff(yN, y2N) / max_abs_diff(y2N, y4N));
}

}  // namespace tconn
