#include "tconn/bundle.hpp"

#include <cmath>

#include "tconn/error.hpp"

namespace tconn {

namespace {

SmoothMap lincomb(const SmoothMap& f, double a, const SmoothMap& g, double b) {
  const auto n = static_cast<Eigen::Index>(f.out_dim());
  Eigen::MatrixXd C(n, 2 * n);
  C << a * Eigen::MatrixXd::Identity(n, n), b * Eigen::MatrixXd::Identity(n, n);
  return compose(pair({f, g}), linear_map(C));
}

}  // namespace

SmoothMap DifferentialBundle::pi0() const { return projection(2 * dE(), 0, dE()); }
SmoothMap DifferentialBundle::pi1() const { return projection(2 * dE(), dE(), dE()); }
SmoothMap DifferentialBundle::p_E() const { return p_map(dE(), 1, 1); }

SmoothMap DifferentialBundle::mu() const {
  return compose(tower_pair(1, {compose(pi0(), lambda), compose(pi1(), zero_map(dE(), 0, 1))}),
                 tangent(plus));
}

SmoothMap DifferentialBundle::U() const { return pair({tangent(q), p_E()}); }

// -e = 2 0(q e) - e, valid because every bundle here is a vector bundle in
// its flat coordinates.
SmoothMap DifferentialBundle::negate() const {
  return lincomb(compose(q, zero), 2.0, identity_map(dE()), -1.0);
}

SmoothMap DifferentialBundle::subtract() const {
  return compose(pair({pi0(), compose(pi1(), negate())}), plus);
}

SmoothMap DifferentialBundle::add_maps(const SmoothMap& f, const SmoothMap& g) const {
  return compose(pair({f, g}), plus);
}

SmoothMap DifferentialBundle::sub_maps(const SmoothMap& f, const SmoothMap& g) const {
  return compose(pair({f, g}), subtract());
}

DifferentialBundle finish_bundle(DifferentialBundle b) {
  const std::size_t dE = b.total->dim, dM = b.base->dim;
  auto check = [&](const SmoothMap& f, std::size_t in, std::size_t out, const char* what) {
    if (f.in_dim() != in || f.out_dim() != out)
      throw Error(Errc::DimensionMismatch, b.name + ": " + what + " has type " + std::to_string(f.in_dim()) +
                                               "->" + std::to_string(f.out_dim()) + ", expected " +
                                               std::to_string(in) + "->" + std::to_string(out));
  };
  check(b.q, dE, dM, "q");
  check(b.plus, 2 * dE, dE, "plus");
  check(b.zero, dM, dE, "zero");
  check(b.lambda, dE, 2 * dE, "lambda");
  b.E2 = fibre_product(b.total, b.q, b.total, b.q, "E2(" + b.name + ")");
  b.E3 = fibre_product(b.E2, compose(projection(2 * dE, 0, dE), b.q), b.total, b.q, "E3(" + b.name + ")");
  b.TE = tangent_space(b.total);
  b.TM = tangent_space(b.base);
  b.TM_x_E = fibre_product(b.TM, p_map(dM, 1, 1), b.total, b.q, "T(M) x_M E(" + b.name + ")");
  return b;
}

DifferentialBundle tangent_bundle(const SpacePtr& m) {
  const std::size_t d = m->dim;
  DifferentialBundle b;
  b.name = "T(" + m->name + ")";
  b.total = tangent_space(m);
  b.base = m;
  b.q = p_map(d, 1, 1);
  b.plus = add_map(d, 1, 1);
  b.zero = zero_map(d, 0, 1);
  b.lambda = lift_map(d, 1, 1);
  b.tangent_of = m;
  return finish_bundle(std::move(b));
}

DifferentialBundle t_of_bundle(const DifferentialBundle& src) {
  const std::size_t dE = src.dE();
  DifferentialBundle b;
  b.name = "T(" + src.name + ")";
  b.total = tangent_space(src.total);
  b.base = tangent_space(src.base);
  b.q = tangent(src.q);
  // T(E) x_{T(M)} T(E) is stored as [xi, xi']; T(+) wants T(E2).
  auto iso = tower_pair(1, {projection(4 * dE, 0, 2 * dE), projection(4 * dE, 2 * dE, 2 * dE)});
  b.plus = compose(iso, tangent(src.plus));
  b.zero = tangent(src.zero);
  b.lambda = compose(tangent(src.lambda), flip_map(dE, 2, 1, 2));
  return finish_bundle(std::move(b));
}

DifferentialBundle pullback_bundle(const SmoothMap& f, const SpacePtr& x, const DifferentialBundle& src) {
  if (f.in_dim() != x->dim || f.out_dim() != src.dM())
    throw Error(Errc::DimensionMismatch, "pullback: map does not land in the bundle base");
  const std::size_t dX = x->dim, dE = src.dE(), n = dX + dE;
  DifferentialBundle b;
  b.name = "pullback(" + (f.name().empty() ? std::string("f") : f.name()) + ", " + src.name + ")";
  b.total = fibre_product(x, f, src.total, src.q, b.name);
  b.base = x;
  b.q = projection(n, 0, dX);
  b.plus = pair({projection(2 * n, 0, dX),
                 compose(pair({projection(2 * n, dX, dE), projection(2 * n, n + dX, dE)}), src.plus)});
  b.zero = pair({identity_map(dX), compose(f, src.zero)});
  b.lambda = tower_pair(1, {compose(projection(n, 0, dX), zero_map(dX, 0, 1)),
                            compose(projection(n, dX, dE), src.lambda)});
  return finish_bundle(std::move(b));
}

DifferentialBundle whitney_sum(const DifferentialBundle& a, const DifferentialBundle& c) {
  if (a.dM() != c.dM()) throw Error(Errc::DimensionMismatch, "whitney_sum: bases differ");
  const std::size_t da = a.dE(), dc = c.dE(), n = da + dc;
  DifferentialBundle b;
  b.name = "whitney(" + a.name + ", " + c.name + ")";
  b.total = fibre_product(a.total, a.q, c.total, c.q, b.name);
  b.base = a.base;
  b.q = compose(projection(n, 0, da), a.q);
  b.plus = pair({compose(pair({projection(2 * n, 0, da), projection(2 * n, n, da)}), a.plus),
                 compose(pair({projection(2 * n, da, dc), projection(2 * n, n + da, dc)}), c.plus)});
  b.zero = pair({a.zero, c.zero});
  b.lambda = tower_pair(1, {compose(projection(n, 0, da), a.lambda), compose(projection(n, da, dc), c.lambda)});
  return finish_bundle(std::move(b));
}

DifferentialBundle finsler_bundle(const DifferentialBundle& src) {
  const std::size_t dE = src.dE();
  DifferentialBundle b;
  b.name = "finsler(" + src.name + ")";
  b.total = src.E2;
  b.base = src.total;
  b.q = src.pi1();
  b.plus = pair({compose(pair({projection(4 * dE, 0, dE), projection(4 * dE, 2 * dE, dE)}), src.plus),
                 projection(4 * dE, dE, dE)});
  b.zero = pair({compose(src.q, src.zero), identity_map(dE)});
  b.lambda = tower_pair(1, {compose(src.pi0(), src.lambda), compose(src.pi1(), zero_map(dE, 0, 1))});
  return finish_bundle(std::move(b));
}

DifferentialBundle differential_object(std::size_t n) {
  DifferentialBundle b;
  b.name = "object(" + std::to_string(n) + ")";
  b.total = euclidean(n);
  b.base = euclidean(0);
  b.q = linear_map(Eigen::MatrixXd::Zero(0, n));
  Eigen::MatrixXd P(n, 2 * n);
  P << Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(n, n);
  b.plus = linear_map(P);
  b.zero = constant_map(0, std::vector<double>(n, 0.0));
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(2 * n, n);
  L.topRows(n) = Eigen::MatrixXd::Identity(n, n);
  b.lambda = linear_map(L);
  return finish_bundle(std::move(b));
}

DifferentialBundle trivial_bundle(std::size_t n, const SpacePtr& m) {
  auto bang = linear_map(Eigen::MatrixXd::Zero(0, m->dim)).named("!");
  auto b = pullback_bundle(bang, m, differential_object(n));
  b.name = "trivial(" + std::to_string(n) + ", " + m->name + ")";
  return b;
}

Report check_bundle(const DifferentialBundle& b, Sampler& s, double tol) {
  Report r;
  r.command = "check";
  r.subject = b.name;
  r.tol = tol;
  const std::size_t dE = b.dE(), dM = b.dM();
  const auto& E = s.points(b.total);
  const auto& M = s.points(b.base);
  const auto& E2 = s.points(b.E2);
  const auto& E3 = s.points(b.E3);
  auto id = identity_map(dE);
  auto pi0 = b.pi0(), pi1 = b.pi1();

  r.items.push_back(equation_item("additive-unit", compose(pair({id, compose(b.q, b.zero)}), b.plus), id, E));
  {
    auto e = [&](std::size_t i) { return projection(3 * dE, i * dE, dE); };
    auto lhs = compose(pair({compose(pair({e(0), e(1)}), b.plus), e(2)}), b.plus);
    auto rhs = compose(pair({e(0), compose(pair({e(1), e(2)}), b.plus)}), b.plus);
    r.items.push_back(equation_item("additive-assoc", lhs, rhs, E3));
  }
  r.items.push_back(equation_item("additive-comm", b.plus, compose(pair({pi1, pi0}), b.plus), E2));
  r.items.push_back(equation_item("plus-over-q", compose(b.plus, b.q), compose(pi0, b.q), E2));
  r.items.push_back(equation_item("zero-section", compose(b.zero, b.q), identity_map(dM), M));

  // (lambda, 0_M) is an additive morphism into T(q).
  r.items.push_back(equation_item("lambda-T(q)-square", compose(b.lambda, tangent(b.q)),
                                  compose(b.q, zero_map(dM, 0, 1)), E));
  r.items.push_back(equation_item("lambda-T(+)-additive", compose(b.plus, b.lambda),
                                  compose(tower_pair(1, {compose(pi0, b.lambda), compose(pi1, b.lambda)}),
                                          tangent(b.plus)),
                                  E2));
  r.items.push_back(equation_item("lambda-T(0)-additive", compose(b.zero, b.lambda),
                                  compose(zero_map(dM, 0, 1), tangent(b.zero)), M));
  // (lambda, 0_q) is an additive morphism into p_E.
  r.items.push_back(equation_item("lambda-p-square", compose(b.lambda, b.p_E()), compose(b.q, b.zero), E));
  r.items.push_back(equation_item("lambda-+E-additive", compose(b.plus, b.lambda),
                                  compose(pair({compose(pi0, b.lambda), compose(pi1, b.lambda)}),
                                          add_map(dE, 1, 1)),
                                  E2));
  r.items.push_back(equation_item("lambda-0E-additive", compose(b.zero, b.lambda),
                                  compose(b.zero, zero_map(dE, 0, 1)), M));
  r.items.push_back(equation_item("lambda-ell", compose(b.lambda, lift_map(dE, 1, 1)),
                                  compose(b.lambda, tangent(b.lambda)), E));
  r.append(universality_check(b, s));
  return r;
}

Report universality_check(const DifferentialBundle& b, Sampler& s, double min_sigma) {
  Report r;
  r.command = "universality";
  r.subject = b.name;
  ReportItem it;
  it.equation = "universality";
  it.threshold = 0.0;
  const std::size_t dE = b.dE(), dM = b.dM();
  auto mu = b.mu();
  double worst_sigma = INFINITY;
  for (const auto& x : s.points(b.E2)) {
    Eigen::MatrixXd J = jacobian(mu, x);
    std::vector<double> e1(x.begin(), x.begin() + dE);
    Eigen::MatrixXd Q = jacobian(b.q, e1);
    Eigen::MatrixXd M(J.rows() + dM, dE);
    M << J.leftCols(dE), Q;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    double rel = (sv.size() == 0 || sv(0) == 0.0) ? 0.0 : sv(sv.size() - 1) / sv(0);
    if (static_cast<std::size_t>(sv.size()) < dE) rel = 0.0;
    if (rel < worst_sigma) {
      worst_sigma = rel;
      it.worst_point = x;
    }
  }
  it.max_residual = std::max(0.0, min_sigma - worst_sigma);
  it.note = "min relative singular value " + format_number(worst_sigma);
  r.items.push_back(it);
  return r;
}

BracketResult bracket(const DifferentialBundle& b, const SmoothMap& f, const std::vector<double>& x, double tol) {
  const std::size_t dE = b.dE(), dM = b.dM();
  if (f.out_dim() != 2 * dE) throw Error(Errc::DimensionMismatch, "bracket: map does not land in T(E)");
  BracketResult res;
  const auto xi = f(x);
  auto p = b.p_E()(xi);
  // Equalizer condition f T(q) = f p q 0.
  res.precondition = max_abs_diff(tangent(b.q)(xi), zero_map(dM, 0, 1)(b.q(p)));
  if (!(res.precondition <= tol))
    throw Error(Errc::PreconditionFailed, "bracket: f T(q) != f p q 0 (residual " +
                                              format_number(res.precondition) + ")");
  auto mu = b.mu();
  std::vector<double> e1 = p;
  const auto qp = b.q(p);
  auto stacked = [&](const std::vector<double>& e) {
    std::vector<double> pt(e);
    pt.insert(pt.end(), p.begin(), p.end());
    auto m = mu(pt);
    auto qe = b.q(e);
    Eigen::VectorXd r(2 * dE + dM);
    for (std::size_t i = 0; i < 2 * dE; ++i) r[i] = m[i] - xi[i];
    for (std::size_t i = 0; i < dM; ++i) r[2 * dE + i] = qe[i] - qp[i];
    return r;
  };
  for (int it = 0; it < 8; ++it) {
    Eigen::VectorXd r = stacked(e1);
    if (r.size() == 0 || r.cwiseAbs().maxCoeff() <= 1e-15) break;
    std::vector<double> pt(e1);
    pt.insert(pt.end(), p.begin(), p.end());
    Eigen::MatrixXd J = jacobian(mu, pt);
    Eigen::MatrixXd M(2 * dE + dM, dE);
    M << J.leftCols(dE), jacobian(b.q, e1);
    Eigen::VectorXd step = M.colPivHouseholderQr().solve(-r);
    for (std::size_t i = 0; i < dE; ++i) e1[i] += step[i];
  }
  Eigen::VectorXd r = stacked(e1);
  res.residual = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  if (!(res.residual <= tol))
    throw Error(Errc::SolveFailed, "bracket: residual " + format_number(res.residual) + " above tolerance");
  res.e = e1;
  res.e2 = e1;
  res.e2.insert(res.e2.end(), p.begin(), p.end());
  return res;
}

SmoothMap bracket_solver(const DifferentialBundle& b) {
  const auto dE = static_cast<Eigen::Index>(b.dE());
  auto mu = b.mu();
  auto p = b.p_E();
  const AffineData* m = mu.affine();
  const AffineData* q = b.q.affine();
  const AffineData* pa = p.affine();
  if (!m || !q || !pa)
    throw Error(Errc::SolveFailed, "bracket_solver: no closed form for a non-affine lift structure");
  // mu(e1, e2) = A e1 + B e2 + c with e2 = P xi; solve [A; Q] e1 = [(I - B P) xi - c; Q P xi].
  Eigen::MatrixXd A = m->A.leftCols(dE), B = m->A.rightCols(dE);
  const Eigen::MatrixXd& Q = q->A;
  const Eigen::MatrixXd& P = pa->A;
  Eigen::MatrixXd M(A.rows() + Q.rows(), dE);
  M << A, Q;
  Eigen::MatrixXd pinv = M.completeOrthogonalDecomposition().pseudoInverse();
  Eigen::MatrixXd R(A.rows() + Q.rows(), 2 * dE);
  R << Eigen::MatrixXd::Identity(2 * dE, 2 * dE) - B * P, Q * P;
  Eigen::VectorXd c(A.rows() + Q.rows());
  c << m->b, Eigen::VectorXd::Zero(Q.rows());
  return affine_map(pinv * R, -pinv * c);
}

SmoothMap bracket_map(const DifferentialBundle& b, const SmoothMap& f) {
  return compose(f, bracket_solver(b));
}

Report check_linear(const LinearMorphism& m, Sampler& s, double tol) {
  Report r;
  r.command = "check-linear";
  r.subject = m.src.name + " -> " + m.dst.name;
  r.tol = tol;
  const auto& E = s.points(m.src.total);
  r.items.push_back(equation_item("bundle-square", compose(m.f1, m.dst.q), compose(m.src.q, m.f0), E));
  r.items.push_back(equation_item("lift-preserved", compose(m.f1, m.dst.lambda),
                                  compose(m.src.lambda, tangent(m.f1)), E));
  return r;
}

}  // namespace tconn
