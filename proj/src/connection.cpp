#include "tconn/connection.hpp"

#include <cmath>

#include "tconn/error.hpp"

namespace tconn {

namespace {

Report make_report(std::string command, std::string subject, double tol) {
  Report r;
  r.command = std::move(command);
  r.subject = std::move(subject);
  r.tol = tol;
  return r;
}

void require_identity(const SmoothMap& f, std::size_t dim, const std::vector<std::vector<double>>& pts,
                      double tol, Errc code, const std::string& what) {
  auto it = equation_item(what, f, identity_map(dim), pts);
  if (!(it.max_residual <= tol))
    throw Error(code, what + " fails with residual " + format_number(it.max_residual));
}

// Pick the [t, e] legs of T(M) x_M E.
SmoothMap leg_t(const DifferentialBundle& b) { return projection(2 * b.dM() + b.dE(), 0, 2 * b.dM()); }
SmoothMap leg_e(const DifferentialBundle& b) { return projection(2 * b.dM() + b.dE(), 2 * b.dM(), b.dE()); }

}  // namespace

ChristoffelData christoffel_data(std::size_t n, std::vector<ExprPtr> entries) {
  if (entries.size() != n * n * n)
    throw Error(Errc::ArityMismatch, "christoffel: expected " + std::to_string(n * n * n) + " entries, got " +
                                         std::to_string(entries.size()));
  return {n, expr_map(n, std::move(entries), "psi")};
}

ChristoffelData zero_christoffel(std::size_t n) {
  return {n, constant_map(n, std::vector<double>(n * n * n, 0.0)).named("psi")};
}

bool christoffel_symmetric(const ChristoffelData& d, Sampler& s, double tol) {
  const std::size_t n = d.n;
  for (const auto& x : s.points(euclidean(n))) {
    auto g = d.psi(x);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k)
          if (std::abs(g[i * n * n + j * n + k] - g[i * n * n + k * n + j]) > tol) return false;
  }
  return true;
}

Report check_vertical(const VerticalConnection& v, Sampler& s, double tol) {
  const auto& b = v.bundle;
  const std::size_t dE = b.dE();
  auto r = make_report("check-vertical", b.name, tol);
  const auto& E = s.points(b.total);
  const auto& TE = s.points(b.TE);
  const auto& E2 = s.points(b.E2);
  const auto& K = v.K;
  r.items.push_back(equation_item("(a) lambda K = 1", compose(b.lambda, K), identity_map(dE), E));
  r.items.push_back(equation_item("(b) K q = p q", compose(K, b.q), compose(b.p_E(), b.q), TE));
  r.items.push_back(
      equation_item("(c) K lambda = ell T(K)", compose(K, b.lambda), compose(lift_map(dE, 1, 1), tangent(K)), TE));
  r.items.push_back(equation_item("(d) K lambda = T(lambda) c T(K)", compose(K, b.lambda),
                                  compose({tangent(b.lambda), flip_map(dE, 2, 1, 2), tangent(K)}), TE));
  r.items.push_back(equation_item("mu K = pi0", compose(b.mu(), K), b.pi0(), E2));
  return r;
}

Report check_horizontal(const HorizontalConnection& h, Sampler& s, double tol) {
  const auto& b = h.bundle;
  const std::size_t dE = b.dE(), dM = b.dM();
  auto r = make_report("check-horizontal", b.name, tol);
  const auto& D = s.points(b.TM_x_E);
  const auto& H = h.H;
  auto pt = leg_t(b), pe = leg_e(b);
  r.items.push_back(equation_item("(i) H T(q) = pi0", compose(H, tangent(b.q)), pt, D));
  r.items.push_back(equation_item("(ii) H p = pi1", compose(H, b.p_E()), pe, D));
  auto ell_x_0 = tower_pair(1, {compose(pt, lift_map(dM, 1, 1)), compose(pe, zero_map(dE, 0, 1))});
  r.items.push_back(equation_item("(iii) H ell = (ell x 0) T(H)", compose(H, lift_map(dE, 1, 1)),
                                  compose(ell_x_0, tangent(H)), D));
  auto zero_x_lambda = tower_pair(1, {compose(pt, zero_map(dM, 1, 2)), compose(pe, b.lambda)});
  r.items.push_back(equation_item("(iv) H T(lambda) c = (0 x lambda) T(H)",
                                  compose({H, tangent(b.lambda), flip_map(dE, 2, 1, 2)}),
                                  compose(zero_x_lambda, tangent(H)), D));
  return r;
}

Report check_connection(const Connection& c, Sampler& s, double tol) {
  const auto& b = c.bundle();
  const std::size_t dE = b.dE();
  auto r = make_report("check-connection", b.name, tol);
  const auto& D = s.points(b.TM_x_E);
  const auto& TE = s.points(b.TE);
  const auto& K = c.vertical.K;
  const auto& H = c.horizontal.H;
  r.items.push_back(equation_item("HK = pi1 q 0_q", compose(H, K), compose({leg_e(b), b.q, b.zero}), D));
  auto sum = fibre_add(compose(pair({K, b.p_E()}), b.mu()), compose(b.U(), H), dE, 1, 1);
  r.items.push_back(equation_item("<K,p> mu + U H = 1", sum, identity_map(2 * dE), TE));
  return r;
}

Report check_finsler(const FinslerConnection& f, Sampler& s, double tol) {
  const auto& b = f.bundle;
  const std::size_t dE = b.dE();
  auto r = make_report("check-finsler", b.name, tol);
  const auto& TE = s.points(b.TE);
  const auto& E2 = s.points(b.E2);
  auto Rp0 = compose(f.R, b.pi0());
  r.items.push_back(equation_item("(a) mu R = 1", compose(b.mu(), f.R), identity_map(2 * dE), E2));
  r.items.push_back(equation_item("(b) R pi1 = p", compose(f.R, b.pi1()), b.p_E(), TE));
  r.items.push_back(equation_item("(c) R pi0 lambda = T(lambda) c T(R pi0)", compose(Rp0, b.lambda),
                                  compose({tangent(b.lambda), flip_map(dE, 2, 1, 2), tangent(Rp0)}), TE));
  r.items.push_back(equation_item("(d) ell T(R pi0) = R pi0 lambda",
                                  compose(lift_map(dE, 1, 1), tangent(Rp0)), compose(Rp0, b.lambda), TE));
  return r;
}

VerticalConnection christoffel_vertical(const ChristoffelData& d) {
  const std::size_t n = d.n;
  if (d.psi.in_dim() != n || d.psi.out_dim() != n * n * n)
    throw Error(Errc::DimensionMismatch, "christoffel: psi must map R^n to R^(n^3)");
  // Contraction over [w, v, y, x, Gamma].
  std::vector<ExprPtr> body;
  const int N = static_cast<int>(n);
  for (int i = 0; i < N; ++i) {
    ExprPtr acc = ex::var(i);
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        acc = ex::add(acc, ex::mul(ex::var(4 * N + i * N * N + j * N + k),
                                   ex::mul(ex::var(N + j), ex::var(2 * N + k))));
    body.push_back(acc);
  }
  for (int i = 0; i < N; ++i) body.push_back(ex::var(3 * N + i));
  auto contract = expr_map(4 * n + n * n * n, std::move(body));
  auto K = compose(pair({identity_map(4 * n), compose(projection(4 * n, 3 * n, n), d.psi)}), contract);
  return {tangent_bundle(euclidean(n)), K.named("K_christoffel")};
}

SpacePtr sphere(std::size_t n) {
  const int N = static_cast<int>(n + 1);
  std::vector<ExprPtr> xs;
  for (int i = 0; i < N; ++i) xs.push_back(ex::var(i));
  auto x = ex::vec(xs);
  auto g = expr_map(n + 1, {ex::sub(ex::dot(x, x), ex::constant(1.0))}, "norm2-1");
  return submanifold(n + 1, g, normalize_map(n + 1), "S" + std::to_string(n));
}

VerticalConnection sphere_vertical(std::size_t n) {
  const int N = static_cast<int>(n + 1);
  auto block = [&](int b) {
    std::vector<ExprPtr> xs;
    for (int i = 0; i < N; ++i) xs.push_back(ex::var(b * N + i));
    return ex::vec(xs);
  };
  auto vy = ex::dot(block(1), block(2));
  std::vector<ExprPtr> body;
  for (int i = 0; i < N; ++i) body.push_back(ex::add(ex::var(i), ex::mul(vy, ex::var(3 * N + i))));
  for (int i = 0; i < N; ++i) body.push_back(ex::var(3 * N + i));
  return {tangent_bundle(sphere(n)), expr_map(4 * (n + 1), std::move(body), "K_sphere")};
}

std::vector<double> apply_vertical(const VerticalConnection& v, const std::vector<double>& xi, double tol) {
  auto p = validate(v.bundle.TE, xi, 0, tol);
  return v.K(p.coords);
}

VerticalConnection canonical_vertical_diff_object(std::size_t n) {
  return {differential_object(n), projection(2 * n, 0, n).named("p_hat")};
}

HorizontalConnection canonical_horizontal_diff_object(std::size_t n) {
  // T(1) x_1 A is A itself; H(a) = (0, a).
  return {differential_object(n), zero_map(n, 0, 1).named("H_object")};
}

Connection canonical_connection_diff_object(std::size_t n) {
  return {canonical_vertical_diff_object(n), canonical_horizontal_diff_object(n)};
}

Connection canonical_affine_connection(std::size_t n) {
  auto b = tangent_bundle(euclidean(n));
  auto K = pair({projection(4 * n, 0, n), projection(4 * n, 3 * n, n)}).named("K_canonical");
  // Input [(u, x), (y, x)]; output (0, u, y, x).
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4 * n, 4 * n);
  const auto N = static_cast<Eigen::Index>(n);
  A.block(N, 0, N, N).setIdentity();
  A.block(2 * N, 2 * N, N, N).setIdentity();
  A.block(3 * N, 3 * N, N, N).setIdentity();
  auto H = linear_map(A).named("H_canonical");
  return {{b, K}, {b, H}};
}

VerticalConnection pullback_vertical(const SmoothMap& f, const SpacePtr& x, const VerticalConnection& v) {
  auto b = pullback_bundle(f, x, v.bundle);
  const std::size_t dX = x->dim, dE = v.bundle.dE(), n = dX + dE;
  auto K = pair({compose(tangent(projection(n, 0, dX)), p_map(dX, 1, 1)),
                 compose(tangent(projection(n, dX, dE)), v.K)});
  return {b, K};
}

HorizontalConnection pullback_horizontal(const SmoothMap& f, const SpacePtr& x, const HorizontalConnection& h) {
  auto b = pullback_bundle(f, x, h.bundle);
  // Input [t in T(X), x, e].
  const std::size_t dX = x->dim, dE = h.bundle.dE(), n = 3 * dX + dE;
  auto pt = projection(n, 0, 2 * dX), pe = projection(n, 3 * dX, dE);
  auto H = tower_pair(1, {pt, compose(pair({compose(pt, tangent(f)), pe}), h.H)});
  return {b, H};
}

Connection pullback_connection(const SmoothMap& f, const SpacePtr& x, const Connection& c) {
  return {pullback_vertical(f, x, c.vertical), pullback_horizontal(f, x, c.horizontal)};
}

VerticalConnection t_of_vertical(const VerticalConnection& v) {
  const std::size_t dE = v.bundle.dE();
  return {t_of_bundle(v.bundle), compose(flip_map(dE, 2, 1, 2), tangent(v.K))};
}

HorizontalConnection t_of_horizontal(const HorizontalConnection& h) {
  const auto& b = h.bundle;
  const std::size_t dE = b.dE(), dM = b.dM(), n = 4 * dM + 2 * dE;
  // Input [zeta in T^2(M), xi in T(E)].
  auto swap = tower_pair(1, {compose(projection(n, 0, 4 * dM), flip_map(dM, 2, 1, 2)),
                             projection(n, 4 * dM, 2 * dE)});
  return {t_of_bundle(b), compose({swap, tangent(h.H), flip_map(dE, 2, 1, 2)})};
}

Connection t_of_connection(const Connection& c) {
  return {t_of_vertical(c.vertical), t_of_horizontal(c.horizontal)};
}

namespace {

void check_retraction(const LinearMorphism& s, const LinearMorphism& r, Sampler& sm) {
  const auto& src = s.src;
  require_identity(compose(s.f1, r.f1), src.dE(), sm.points(src.total), sm.config().point_tol,
                   Errc::SectionRetractionMismatch, "s r = 1 on the total space");
  require_identity(compose(s.f0, r.f0), src.dM(), sm.points(src.base), sm.config().point_tol,
                   Errc::SectionRetractionMismatch, "s r = 1 on the base");
}

void check_retraction_types(const LinearMorphism& s, const LinearMorphism& r, const DifferentialBundle& b) {
  if (s.f1.out_dim() != b.dE() || s.f0.out_dim() != b.dM() || r.f1.in_dim() != b.dE() || r.f0.in_dim() != b.dM() ||
      s.f1.in_dim() != r.f1.out_dim() || s.f0.in_dim() != r.f0.out_dim())
    throw Error(Errc::DimensionMismatch, "retract: section and retraction do not fit the bundle");
}

}  // namespace

VerticalConnection retract_vertical(const VerticalConnection& v, const LinearMorphism& s, const LinearMorphism& r,
                                    Sampler* check) {
  check_retraction_types(s, r, v.bundle);
  if (check) check_retraction(s, r, *check);
  return {s.src, compose({tangent(s.f1), v.K, r.f1})};
}

HorizontalConnection retract_horizontal(const HorizontalConnection& h, const LinearMorphism& s,
                                        const LinearMorphism& r, Sampler* check) {
  check_retraction_types(s, r, h.bundle);
  if (check) check_retraction(s, r, *check);
  return {s.src, compose({product({tangent(s.f0), s.f1}), h.H, tangent(r.f1)})};
}

LinearMorphism tangent_morphism(const SmoothMap& f, const DifferentialBundle& src, const DifferentialBundle& dst) {
  return {tangent(f), f, src, dst};
}

VerticalConnection retract_affine(const VerticalConnection& v, const SpacePtr& sub, const SmoothMap& s,
                                  const SmoothMap& r, Sampler* check) {
  auto tb = tangent_bundle(sub);
  return retract_vertical(v, tangent_morphism(s, tb, v.bundle), tangent_morphism(r, v.bundle, tb), check);
}

HorizontalConnection retract_affine_horizontal(const HorizontalConnection& h, const SpacePtr& sub,
                                               const SmoothMap& s, const SmoothMap& r, Sampler* check) {
  auto tb = tangent_bundle(sub);
  return retract_horizontal(h, tangent_morphism(s, tb, h.bundle), tangent_morphism(r, h.bundle, tb), check);
}

FinslerConnection vertical_to_finsler(const VerticalConnection& v) {
  return {v.bundle, pair({v.K, v.bundle.p_E()}).named("R")};
}

VerticalConnection finsler_to_vertical(const FinslerConnection& f) {
  return {f.bundle, compose(f.R, f.bundle.pi0())};
}

SmoothMap one_minus_UH(const HorizontalConnection& h) {
  const auto& b = h.bundle;
  return fibre_sub(identity_map(2 * b.dE()), compose(b.U(), h.H), b.dE(), 1, 1);
}

Connection vertical_from_horizontal(const HorizontalConnection& h) {
  auto K = bracket_map(h.bundle, one_minus_UH(h));
  return {{h.bundle, K.named("K_from_H")}, h};
}

Connection horizontal_from_vertical(const VerticalConnection& v, const HorizontalConnection& j) {
  const auto& b = v.bundle;
  if (j.H.in_dim() != b.TM_x_E->dim || j.H.out_dim() != 2 * b.dE())
    throw Error(Errc::DimensionMismatch, "derive_h: horizontal seed does not fit the bundle");
  auto proj = fibre_sub(identity_map(2 * b.dE()), compose(pair({v.K, b.p_E()}), b.mu()), b.dE(), 1, 1);
  return {v, {b, compose(j.H, proj).named("H_from_K")}};
}

void require_vector_field(const SpacePtr& m, const SmoothMap& w, Sampler& s, double tol) {
  if (w.in_dim() != m->dim || w.out_dim() != 2 * m->dim)
    throw Error(Errc::NotAVectorField, "vector field must map M to T(M)");
  require_identity(compose(w, p_map(m->dim, 1, 1)), m->dim, s.points(m), tol, Errc::NotAVectorField, "w p = 1");
}

void require_section(const DifferentialBundle& b, const SmoothMap& sec, Sampler& s, double tol) {
  if (sec.in_dim() != b.dM() || sec.out_dim() != b.dE())
    throw Error(Errc::NotASection, "section must map M to E");
  require_identity(compose(sec, b.q), b.dM(), s.points(b.base), tol, Errc::NotASection, "s q = 1");
}

SmoothMap covariant_derivative(const VerticalConnection& v, const SmoothMap& w, const SmoothMap& s,
                               Sampler* check) {
  const auto& b = v.bundle;
  if (check) {
    require_vector_field(b.base, w, *check, check->config().point_tol);
    require_section(b, s, *check, check->config().point_tol);
  } else if (w.out_dim() != 2 * b.dM() || s.out_dim() != b.dE() || w.in_dim() != s.in_dim()) {
    throw Error(Errc::DimensionMismatch, "covariant derivative: field and section do not fit the bundle");
  }
  return compose({w, tangent(s), v.K});
}

SmoothMap decomposition_map(const Connection& c) {
  const auto& b = c.bundle();
  return pair({c.vertical.K, tangent(b.q), b.p_E()});
}

SmoothMap reconstruction_map(const Connection& c) {
  const auto& b = c.bundle();
  const std::size_t dE = b.dE(), dM = b.dM(), n = 2 * dE + 2 * dM;
  auto e0 = projection(n, 0, dE), t = projection(n, dE, 2 * dM), e1 = projection(n, dE + 2 * dM, dE);
  auto vertical = compose(tower_pair(1, {compose(e0, b.lambda), compose(e1, zero_map(dE, 0, 1))}), tangent(b.plus));
  auto horizontal = compose(pair({t, e1}), c.horizontal.H);
  return fibre_add(vertical, horizontal, dE, 1, 1);
}

Decomposition decompose(const Connection& c, const std::vector<double>& xi) {
  const auto& b = c.bundle();
  if (xi.size() != 2 * b.dE()) throw Error(Errc::DimensionMismatch, "decompose: point is not in T(E)");
  auto out = decomposition_map(c)(xi);
  const auto dE = static_cast<std::ptrdiff_t>(b.dE()), dM = static_cast<std::ptrdiff_t>(b.dM());
  Decomposition d;
  d.e0.assign(out.begin(), out.begin() + dE);
  d.t.assign(out.begin() + dE, out.begin() + dE + 2 * dM);
  d.e1.assign(out.begin() + dE + 2 * dM, out.end());
  return d;
}

std::vector<double> reconstruct(const Connection& c, const Decomposition& d, double tol) {
  const auto& b = c.bundle();
  if (d.e0.size() != b.dE() || d.e1.size() != b.dE() || d.t.size() != 2 * b.dM())
    throw Error(Errc::DimensionMismatch, "reconstruct: components have the wrong size");
  auto m0 = b.q(d.e0), m1 = b.q(d.e1);
  auto mt = p_map(b.dM(), 1, 1)(d.t);
  double worst = std::max(max_abs_diff(m0, mt), max_abs_diff(m1, mt));
  if (!(worst <= tol))
    throw Error(Errc::CompatibilityViolation,
                "reconstruct: base points differ by " + format_number(worst));
  std::vector<double> in;
  in.insert(in.end(), d.e0.begin(), d.e0.end());
  in.insert(in.end(), d.t.begin(), d.t.end());
  in.insert(in.end(), d.e1.begin(), d.e1.end());
  return reconstruction_map(c)(in);
}

Connection sphere_connection(std::size_t n) {
  auto flat = canonical_affine_connection(n + 1);
  auto j = retract_affine_horizontal(flat.horizontal, sphere(n), identity_map(n + 1), normalize_map(n + 1));
  return horizontal_from_vertical(sphere_vertical(n), j);
}

}  // namespace tconn
