#pragma once

#include "tconn/connection.hpp"

namespace tconn {

struct CurvatureMaps {
  SmoothMap D;  // T^2(E) -> E2, <cT(K)K, T(K)K>
  SmoothMap C;  // T^2(E) -> E, cT(K)K - T(K)K in the q-fibre
};

CurvatureMaps curvature(const VerticalConnection& v);
Report flatness_report(const VerticalConnection& v, Sampler& s, double tol = 1e-8);
bool is_flat(const VerticalConnection& v, Sampler& s, double tol = 1e-8);

// w2 T(w1) T^2(s) C_K
SmoothMap curvature_tensor(const VerticalConnection& v, const SmoothMap& w1, const SmoothMap& w2, const SmoothMap& s);
// nabla(w1, nabla(w2, s)) - nabla(w2, nabla(w1, s)) - nabla([w1, w2], s)
SmoothMap curvature_tensor_standard(const VerticalConnection& v, const SmoothMap& w1, const SmoothMap& w2,
                                    const SmoothMap& s);
// nabla^2(w1, w2, s) - nabla^2(w2, w1, s), affine and torsion-free only.
SmoothMap curvature_tensor_second(const VerticalConnection& v, const SmoothMap& w1, const SmoothMap& w2,
                                  const SmoothMap& s);

struct TorsionMaps {
  SmoothMap W;  // T^2(M) -> T_2(M), <cK, K>
  SmoothMap V;  // T^2(M) -> T(M), cK - K
};

TorsionMaps torsion(const VerticalConnection& v);
Report torsion_report(const VerticalConnection& v, Sampler& s, double tol = 1e-8);
bool is_torsion_free(const VerticalConnection& v, Sampler& s, double tol = 1e-8);
SmoothMap torsion_tensor(const VerticalConnection& v, const SmoothMap& w1, const SmoothMap& w2);
SmoothMap torsion_tensor_standard(const VerticalConnection& v, const SmoothMap& w1, const SmoothMap& w2);

// {w1 T(w2) - w2 T(w1) c} over the tangent bundle of m.
SmoothMap lie_bracket(const SpacePtr& m, const SmoothMap& w1, const SmoothMap& w2);

// Antisymmetry, first identity (c T(c) C middle term) and second identity on T^4(M).
// With statement_variant the printed first identity is listed as not evaluable.
Report bianchi(const VerticalConnection& v, Sampler& s, double tol = 1e-8, bool statement_variant = false);

// Hc = tau H and cU = U tau.
Report flip_equivariance(const Connection& c, Sampler& s, double tol = 1e-8);

// F = RH - U mu on T^2(M), difference in the p-fibre over T(M).
SmoothMap almost_complex(const Connection& c);
Report almost_complex_report(const Connection& c, Sampler& s, double tol = 1e-8);

}  // namespace tconn
