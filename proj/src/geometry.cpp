#include "tconn/geometry.hpp"

#include "tconn/error.hpp"

namespace tconn {

namespace {

void require_affine(const DifferentialBundle& b, const char* what) {
  if (!b.is_affine()) throw Error(Errc::NotAffine, std::string(what) + ": " + b.name + " is not a tangent bundle");
}

SmoothMap nabla(const VerticalConnection& v, const SmoothMap& w, const SmoothMap& s) {
  return covariant_derivative(v, w, s);
}

// Zero of E over the base of f's values.
SmoothMap zero_over(const DifferentialBundle& b, const SmoothMap& f) { return compose({f, b.q, b.zero}); }

Report make_report(std::string command, std::string subject, double tol) {
  Report r;
  r.command = std::move(command);
  r.subject = std::move(subject);
  r.tol = tol;
  return r;
}

}  // namespace

CurvatureMaps curvature(const VerticalConnection& v) {
  const auto& b = v.bundle;
  auto TK_K = compose(tangent(v.K), v.K);
  auto cTK_K = compose(flip_map(b.dE(), 2, 1, 2), TK_K);
  return {pair({cTK_K, TK_K}), b.sub_maps(cTK_K, TK_K)};
}

Report flatness_report(const VerticalConnection& v, Sampler& s, double tol) {
  const auto& b = v.bundle;
  auto r = make_report("curvature", b.name, tol);
  auto C = curvature(v).C;
  r.items.push_back(equation_item("cT(K)K = T(K)K", C, zero_over(b, C), s.points(tangent_space(b.total, 2))));
  return r;
}

bool is_flat(const VerticalConnection& v, Sampler& s, double tol) { return flatness_report(v, s, tol).pass(); }

SmoothMap curvature_tensor(const VerticalConnection& v, const SmoothMap& w1, const SmoothMap& w2, const SmoothMap& s) {
  return compose({w2, tangent(w1), tangent(s, 2), curvature(v).C});
}

SmoothMap curvature_tensor_standard(const VerticalConnection& v, const SmoothMap& w1, const SmoothMap& w2,
                                    const SmoothMap& s) {
  const auto& b = v.bundle;
  auto a = nabla(v, w1, nabla(v, w2, s));
  auto c = nabla(v, w2, nabla(v, w1, s));
  auto d = nabla(v, lie_bracket(b.base, w1, w2), s);
  return b.sub_maps(b.sub_maps(a, c), d);
}

SmoothMap curvature_tensor_second(const VerticalConnection& v, const SmoothMap& w1, const SmoothMap& w2,
                                  const SmoothMap& s) {
  const auto& b = v.bundle;
  require_affine(b, "curvature_tensor_second");
  auto second = [&](const SmoothMap& a, const SmoothMap& c) {
    return b.sub_maps(nabla(v, a, nabla(v, c, s)), nabla(v, nabla(v, a, c), s));
  };
  return b.sub_maps(second(w1, w2), second(w2, w1));
}

TorsionMaps torsion(const VerticalConnection& v) {
  const auto& b = v.bundle;
  require_affine(b, "torsion");
  auto cK = compose(flip_map(b.dM(), 2, 1, 2), v.K);
  return {pair({cK, v.K}), b.sub_maps(cK, v.K)};
}

Report torsion_report(const VerticalConnection& v, Sampler& s, double tol) {
  const auto& b = v.bundle;
  auto r = make_report("torsion", b.name, tol);
  auto V = torsion(v).V;
  r.items.push_back(equation_item("cK = K", V, zero_over(b, V), s.points(b.TE)));
  return r;
}

bool is_torsion_free(const VerticalConnection& v, Sampler& s, double tol) { return torsion_report(v, s, tol).pass(); }

SmoothMap torsion_tensor(const VerticalConnection& v, const SmoothMap& w1, const SmoothMap& w2) {
  return compose({w2, tangent(w1), torsion(v).V});
}

SmoothMap torsion_tensor_standard(const VerticalConnection& v, const SmoothMap& w1, const SmoothMap& w2) {
  const auto& b = v.bundle;
  require_affine(b, "torsion_tensor_standard");
  return b.sub_maps(b.sub_maps(nabla(v, w1, w2), nabla(v, w2, w1)), lie_bracket(b.base, w1, w2));
}

SmoothMap lie_bracket(const SpacePtr& m, const SmoothMap& w1, const SmoothMap& w2) {
  const std::size_t d = m->dim;
  if (w1.in_dim() != d || w2.in_dim() != d || w1.out_dim() != 2 * d || w2.out_dim() != 2 * d)
    throw Error(Errc::NotAVectorField, "lie_bracket: fields must map M to T(M)");
  auto a = compose(w1, tangent(w2));
  auto c = compose({w2, tangent(w1), flip_map(d, 2, 1, 2)});
  // Difference in the fibre of p: T^2(M) -> T(M), the outer slot.
  return bracket_map(tangent_bundle(m), fibre_sub(a, c, d, 2, 2));
}

Report bianchi(const VerticalConnection& v, Sampler& s, double tol, bool statement_variant) {
  const auto& b = v.bundle;
  require_affine(b, "bianchi");
  if (!is_torsion_free(v, s, tol))
    throw Error(Errc::NotTorsionFree, "bianchi: " + b.name + " has torsion above " + format_number(tol));
  const std::size_t d = b.dM();
  auto r = make_report("bianchi", b.name, tol);
  auto C = curvature(v).C;
  const auto& T3 = s.points(tangent_space(b.base, 3));

  // On T^3(M): c = c_{T(M)} swaps slots 2,3 and T(c) swaps slots 1,2.
  auto c3 = flip_map(d, 3, 2, 3), Tc3 = flip_map(d, 3, 1, 2);
  r.items.push_back(equation_item("antisymmetry", compose(c3, C), compose(C, b.negate()), T3));

  auto first = b.add_maps(b.add_maps(C, compose({c3, Tc3, C})), compose({Tc3, c3, C}));
  auto it = equation_item("bianchi-1", first, zero_over(b, C), T3);
  it.note = "C + cT(c)C + T(c)cC = 0";
  r.items.push_back(it);
  if (statement_variant) {
    ReportItem st;
    st.equation = "bianchi-1-statement";
    st.evaluable = false;
    st.max_residual = 0.0;
    st.note = "C + cT(C)C + T(c)cC: T(C) lands in T^2(M), which C cannot take";
    r.items.push_back(st);
  }

  // On T^4(M): D_K(C) = T(C)K, T(c) swaps slots 2,3 and T^2(c) swaps slots 1,2.
  auto DC = compose(tangent(C), v.K);
  auto Tc4 = flip_map(d, 4, 2, 3), TTc4 = flip_map(d, 4, 1, 2);
  auto second = b.add_maps(b.add_maps(DC, compose({Tc4, TTc4, DC})), compose({TTc4, Tc4, DC}));
  auto it2 = equation_item("bianchi-2", second, zero_over(b, DC), s.points(tangent_space(b.base, 4)));
  it2.note = "D(C) + T(c)T^2(c)D(C) + T^2(c)T(c)D(C) = 0";
  r.items.push_back(it2);
  return r;
}

Report flip_equivariance(const Connection& c, Sampler& s, double tol) {
  const auto& b = c.bundle();
  require_affine(b, "flip_equivariance");
  const std::size_t d = b.dM();
  auto r = make_report("flip-equivariance", b.name, tol);
  auto tau = pair({projection(4 * d, 2 * d, 2 * d), projection(4 * d, 0, 2 * d)});
  auto flip = flip_map(d, 2, 1, 2);
  r.items.push_back(equation_item("Hc = tau H", compose(c.horizontal.H, flip), compose(tau, c.horizontal.H),
                                  s.points(b.TM_x_E)));
  r.items.push_back(equation_item("cU = U tau", compose(flip, b.U()), compose(b.U(), tau), s.points(b.TE)));
  return r;
}

SmoothMap almost_complex(const Connection& c) {
  const auto& b = c.bundle();
  require_affine(b, "almost_complex");
  auto R = pair({c.vertical.K, b.p_E()});
  return fibre_sub(compose(R, c.horizontal.H), compose(b.U(), b.mu()), b.dE(), 1, 1);
}

Report almost_complex_report(const Connection& c, Sampler& s, double tol) {
  const auto& b = c.bundle();
  auto r = make_report("almost-complex", b.name, tol);
  auto F = almost_complex(c);
  r.items.push_back(equation_item("FF = -1", compose(F, F), neg_map(b.dE(), 1, 1), s.points(b.TE)));
  return r;
}

}  // namespace tconn
