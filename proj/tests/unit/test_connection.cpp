#include "doctest.h"
#include "helpers.hpp"
#include "tconn/connection.hpp"
#include "tconn/error.hpp"

using namespace tconn;
using testing::diff;
using testing::v;

namespace {

void require_pass(const Report& r, double bound) {
  for (const auto& it : r.items) CHECK_MESSAGE(it.max_residual <= bound, r.command << " " << it.equation);
}

VerticalConnection flat(std::size_t n) { return christoffel_vertical(zero_christoffel(n)); }

// Gamma^0_11 = x0 on R^2, others zero.
ChristoffelData curved2() {
  std::vector<ExprPtr> g(8, ex::constant(0.0));
  g[0 * 4 + 1 * 2 + 1] = ex::var(0);
  return christoffel_data(2, g);
}

}  // namespace

TEST_CASE("christoffel golden values") {
  CHECK(flat(1).K(v({1, 2, 3, 4})) == v({1, 4}));
  CHECK(christoffel_vertical(christoffel_data(1, {ex::constant(1.0)})).K(v({1, 2, 3, 4})) == v({7, 4}));
  CHECK(christoffel_vertical(christoffel_data(1, {ex::var(0)})).K(v({0, 1, 1, 2})) == v({2, 2}));
  CHECK_THROWS_AS(christoffel_data(2, {ex::constant(1.0)}), Error);
}

TEST_CASE("vertical connections pass their checker") {
  Sampler s;
  require_pass(check_vertical(flat(1), s), 1e-12);
  require_pass(check_vertical(flat(3), s), 1e-12);
  require_pass(check_vertical(christoffel_vertical(curved2()), s), 1e-9);
  require_pass(check_vertical(sphere_vertical(2), s), 1e-9);
  require_pass(check_vertical(canonical_vertical_diff_object(2), s), 1e-12);
}

TEST_CASE("non-additive K fails") {
  auto b = tangent_bundle(euclidean(1));
  auto w = ex::var(0), vv = ex::var(1), y = ex::var(2), x = ex::var(3);
  VerticalConnection bad{b, expr_map(4, {ex::add(ex::add(w, ex::mul(x, ex::mul(vv, y))), vv), x})};
  Sampler s;
  auto r = check_vertical(bad, s);
  // (a) and (c) hold for this K; the additivity equation (d) does not.
  CHECK(r.residual("(d) K lambda = T(lambda) c T(K)") >= 0.1);
  CHECK_FALSE(r.pass());
}

TEST_CASE("sphere connection values") {
  auto k = sphere_vertical(2);
  CHECK(diff(apply_vertical(k, v({0, 0, -1, 1, 0, 0, 1, 0, 0, 0, 0, 1})), v({0, 0, 0, 0, 0, 1})) <= 1e-15);
  // v = 0 with w tangent
  CHECK(apply_vertical(k, v({0.5, 0.25, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1})) == v({0.5, 0.25, 0, 0, 0, 1}));
  try {
    apply_vertical(k, v({0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1}));
    FAIL("expected ConstraintViolation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConstraintViolation);
  }
  Sampler s;
  for (const auto& p : s.points(k.bundle.TE)) {
    auto out = k.K(p);
    CHECK(std::abs(out[0] * out[3] + out[1] * out[4] + out[2] * out[5]) <= 1e-9);
  }
}

TEST_CASE("horizontal connections") {
  Sampler s;
  require_pass(check_horizontal(canonical_horizontal_diff_object(1), s), 1e-12);
  auto c = canonical_affine_connection(1);
  require_pass(check_horizontal(c.horizontal, s), 1e-12);
  CHECK(c.horizontal.H(v({2, 4, 3, 4})) == v({0, 2, 3, 4}));
  CHECK(c.vertical.K(v({1, 2, 3, 4})) == v({1, 4}));
  CHECK(canonical_vertical_diff_object(1).K(v({3, 5})) == v({3}));
  CHECK(canonical_horizontal_diff_object(1).H(v({5})) == v({0, 5}));

  // A quadratic term in the top component breaks (iii).
  auto u = ex::var(0), y = ex::var(2), x = ex::var(3);
  HorizontalConnection bad{c.bundle(), expr_map(4, {ex::mul(u, u), u, y, x})};
  auto r = check_horizontal(bad, s);
  CHECK(r.residual("(iii) H ell = (ell x 0) T(H)") >= 0.1);
}

TEST_CASE("connections") {
  Sampler s;
  require_pass(check_connection(canonical_affine_connection(1), s), 1e-12);
  require_pass(check_connection(canonical_affine_connection(3), s), 1e-12);
  require_pass(check_connection(canonical_connection_diff_object(2), s), 1e-12);

  auto sc = sphere_connection(2);
  require_pass(check_horizontal(sc.horizontal, s), 1e-8);
  require_pass(check_connection(sc, s), 1e-8);

  // Sphere K with the naive flat H does not decompose T(E).
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(12, 12);
  A.block(3, 0, 3, 3).setIdentity();
  A.block(6, 6, 6, 6).setIdentity();
  Connection bad{sphere_vertical(2), {sphere_vertical(2).bundle, linear_map(A)}};
  CHECK(bad.horizontal.H(v({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12})) == v({0, 0, 0, 1, 2, 3, 7, 8, 9, 10, 11, 12}));
  CHECK(check_connection(bad, s).residual("<K,p> mu + U H = 1") >= 0.1);
}

TEST_CASE("identity decomposition at a golden point") {
  auto c = canonical_affine_connection(1);
  const auto& b = c.bundle();
  auto xi = v({1, 2, 3, 4});
  auto first = compose(pair({c.vertical.K, b.p_E()}), b.mu())(xi);
  auto second = compose(b.U(), c.horizontal.H)(xi);
  CHECK(first == v({1, 0, 3, 4}));
  CHECK(second == v({0, 2, 3, 4}));
  CHECK(add_map(2, 1, 1)(v({1, 0, 3, 4, 0, 2, 3, 4})) == v({1, 2, 3, 4}));
}

TEST_CASE("pullback connections") {
  Sampler s;
  auto bang = linear_map(Eigen::MatrixXd::Zero(0, 1));
  auto pv = pullback_vertical(bang, euclidean(1), canonical_vertical_diff_object(1));
  require_pass(check_vertical(pv, s), 1e-12);
  // T(R x A) stored as [x', a', x, a]; the trivial connection keeps (a', x, a).
  CHECK(pv.K(v({7, 2, 3, 5})) == v({3, 2}));
  auto ph = pullback_horizontal(bang, euclidean(1), canonical_horizontal_diff_object(1));
  require_pass(check_horizontal(ph, s), 1e-12);
  require_pass(check_connection(pullback_connection(bang, euclidean(1), canonical_connection_diff_object(1)), s),
               1e-12);

  auto t = ex::var(0);
  auto gamma = expr_map(1, {ex::cos(t), ex::sin(t), ex::constant(0.0)}, "gamma");
  auto sc = sphere_connection(2);
  auto pc = pullback_connection(gamma, euclidean(1), sc);
  require_pass(check_vertical(pc.vertical, s), 1e-8);
  require_pass(check_horizontal(pc.horizontal, s), 1e-8);
  require_pass(check_connection(pc, s), 1e-8);
}

TEST_CASE("tangent connections") {
  Sampler s;
  auto k = flat(1);
  auto tk = t_of_vertical(k);
  auto g = v({1, 0, 3, 0, 0, 2, 0, 4});
  CHECK(tk.K(g) == tangent(k.K)(flip_map(2, 2, 1, 2)(g)));
  require_pass(check_vertical(tk, s), 1e-10);
  auto tc = t_of_connection(canonical_affine_connection(1));
  require_pass(check_horizontal(tc.horizontal, s), 1e-10);
  require_pass(check_connection(tc, s), 1e-10);
  require_pass(check_vertical(t_of_vertical(sphere_vertical(2)), s), 1e-8);
  require_pass(check_connection(t_of_connection(sphere_connection(2)), s), 1e-8);
}

TEST_CASE("retracts") {
  Sampler s;
  auto r = retract_affine(flat(3), sphere(2), identity_map(3), normalize_map(3), &s);
  require_pass(check_vertical(r, s), 1e-9);
  // Retracting the flat connection onto the sphere gives the sphere connection.
  CHECK(equation_item("retract", r.K, sphere_vertical(2).K, s.points(r.bundle.TE)).max_residual <= 1e-9);

  auto same = retract_affine(sphere_vertical(2), sphere(2), identity_map(3), identity_map(3), &s);
  CHECK(equation_item("identity retract", same.K, sphere_vertical(2).K, s.points(same.bundle.TE)).max_residual == 0.0);

  auto doubled = linear_map(2.0 * Eigen::MatrixXd::Identity(3, 3));
  try {
    retract_affine(flat(3), sphere(2), identity_map(3), doubled, &s);
    FAIL("expected SectionRetractionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SectionRetractionMismatch);
  }
}

TEST_CASE("finsler form") {
  Sampler s;
  auto f = vertical_to_finsler(flat(1));
  CHECK(f.R(v({1, 2, 3, 4})) == v({1, 4, 3, 4}));
  require_pass(check_finsler(f, s), 1e-12);
  for (const auto& k : {flat(2), sphere_vertical(2), christoffel_vertical(curved2())}) {
    auto fr = vertical_to_finsler(k);
    require_pass(check_finsler(fr, s), 1e-8);
    auto back = finsler_to_vertical(fr);
    for (const auto& p : s.points(k.bundle.TE)) CHECK(back.K(p) == k.K(p));
  }
}

TEST_CASE("K from H") {
  Sampler s;
  auto c = canonical_affine_connection(1);
  const auto& b = c.bundle();
  auto f = one_minus_UH(c.horizontal);
  const auto& TE = s.points(b.TE);
  CHECK(equation_item("(1-UH) T(q) = (1-UH) p q 0", compose(f, tangent(b.q)),
                      compose({f, b.p_E(), b.q, zero_map(b.dM(), 0, 1)}), TE)
            .max_residual <= 1e-10);
  auto kc = vertical_from_horizontal(c.horizontal);
  CHECK(equation_item("K", kc.vertical.K, c.vertical.K, TE).max_residual <= 1e-12);
  for (const auto& p : TE) CHECK(diff(bracket(b, f, p).e, c.vertical.K(p)) <= 1e-9);
  require_pass(check_connection(kc, s), 1e-8);

  auto sc = sphere_connection(2);
  auto again = vertical_from_horizontal(sc.horizontal);
  CHECK(equation_item("K sphere", again.vertical.K, sc.vertical.K, s.points(sc.bundle().TE)).max_residual <= 1e-8);
  require_pass(check_connection(again, s), 1e-8);
}

TEST_CASE("H from K") {
  Sampler s;
  auto c = canonical_affine_connection(1);
  auto hc = horizontal_from_vertical(c.vertical, c.horizontal);
  CHECK(equation_item("H", hc.horizontal.H, c.horizontal.H, s.points(c.bundle().TM_x_E)).max_residual <= 1e-12);

  // Two seeds give the same H on the sphere.
  auto flat3 = canonical_affine_connection(3);
  auto bent = horizontal_from_vertical(christoffel_vertical(zero_christoffel(3)), flat3.horizontal);
  std::vector<ExprPtr> g(27, ex::constant(0.0));
  g[0] = ex::var(1);
  g[13] = ex::constant(0.5);
  auto other3 = horizontal_from_vertical(christoffel_vertical(christoffel_data(3, g)), flat3.horizontal);
  auto j1 = retract_affine_horizontal(bent.horizontal, sphere(2), identity_map(3), normalize_map(3));
  auto j2 = retract_affine_horizontal(other3.horizontal, sphere(2), identity_map(3), normalize_map(3));
  require_pass(check_horizontal(j2, s), 1e-8);
  auto h1 = horizontal_from_vertical(sphere_vertical(2), j1);
  auto h2 = horizontal_from_vertical(sphere_vertical(2), j2);
  auto D = s.points(h1.bundle().TM_x_E);
  CHECK(equation_item("J1 vs J2", h1.horizontal.H, h2.horizontal.H, D).max_residual <= 1e-8);
  CHECK(equation_item("J1 vs J2 seeds", j1.H, j2.H, D).max_residual >= 0.01);
}

TEST_CASE("covariant derivative") {
  Sampler s;
  auto k = flat(1);
  auto x = ex::var(0);
  auto w = expr_map(1, {ex::constant(1.0), x});
  auto sec = expr_map(1, {ex::mul(x, x), x});
  auto nabla = covariant_derivative(k, w, sec, &s);
  CHECK(nabla(v({3.0})) == v({6, 3}));
  auto zero = expr_map(1, {ex::constant(0.0), x});
  CHECK(equation_item("zero", covariant_derivative(k, w, zero, &s), zero, s.points(euclidean(1))).max_residual == 0.0);

  try {
    covariant_derivative(k, expr_map(1, {ex::constant(1.0), ex::add(x, ex::constant(1.0))}), sec, &s);
    FAIL("expected NotAVectorField");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotAVectorField);
  }
  try {
    covariant_derivative(k, w, expr_map(1, {x, ex::mul(x, x)}), &s);
    FAIL("expected NotASection");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotASection);
  }

  // On S^2 with the rotation field and the section x -> (e3 - (e3.x) x, x).
  auto sk = sphere_vertical(2);
  auto x0 = ex::var(0), x1 = ex::var(1), x2 = ex::var(2);
  auto rot = expr_map(3, {ex::neg(x1), x0, ex::constant(0.0), x0, x1, x2});
  auto tang = expr_map(3, {ex::neg(ex::mul(x2, x0)), ex::neg(ex::mul(x2, x1)), ex::sub(ex::constant(1.0), ex::mul(x2, x2)),
                           x0, x1, x2});
  auto d = covariant_derivative(sk, rot, tang, &s);
  for (const auto& p : s.points(sk.bundle.base)) {
    auto out = d(p);
    CHECK(constraint_residual(*sk.bundle.total, out).residual <= 1e-9);
  }
}

TEST_CASE("decompose and reconstruct") {
  auto c = canonical_affine_connection(1);
  auto d = decompose(c, v({1, 2, 3, 4}));
  CHECK(d.e0 == v({1, 4}));
  CHECK(d.t == v({2, 4}));
  CHECK(d.e1 == v({3, 4}));
  CHECK(reconstruct(c, d) == v({1, 2, 3, 4}));
  auto lam = decompose(c, c.bundle().lambda(v({5, 6})));
  CHECK(lam.e0 == v({5, 6}));
  CHECK(lam.t == v({0, 6}));
  CHECK(lam.e1 == v({0, 6}));
  try {
    reconstruct(c, {v({1, 4}), v({2, 5}), v({3, 4})});
    FAIL("expected CompatibilityViolation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CompatibilityViolation);
  }

  Sampler s;
  auto sc = sphere_connection(2);
  for (const auto& p : s.points(sc.bundle().TE)) {
    auto dd = decompose(sc, p);
    CHECK(diff(reconstruct(sc, dd, 1e-9), p) <= 1e-8);
  }
}
