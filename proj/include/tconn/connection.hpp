#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tconn/bundle.hpp"

namespace tconn {

struct VerticalConnection {
  DifferentialBundle bundle;
  SmoothMap K;  // T(E) -> E
};

struct HorizontalConnection {
  DifferentialBundle bundle;
  SmoothMap H;  // T(M) x_M E -> T(E), stored as [t, e]
};

struct Connection {
  VerticalConnection vertical;
  HorizontalConnection horizontal;
  const DifferentialBundle& bundle() const { return vertical.bundle; }
};

struct FinslerConnection {
  DifferentialBundle bundle;
  SmoothMap R;  // T(E) -> E2
};

// psi: R^n -> R^(n^3); entry i*n*n + j*n + k is Gamma^i_jk (0-based).
struct ChristoffelData {
  std::size_t n = 0;
  SmoothMap psi;
};

ChristoffelData christoffel_data(std::size_t n, std::vector<ExprPtr> entries);
ChristoffelData zero_christoffel(std::size_t n);
bool christoffel_symmetric(const ChristoffelData& d, Sampler& s, double tol = 1e-12);

Report check_vertical(const VerticalConnection& v, Sampler& s, double tol = 1e-8);
Report check_horizontal(const HorizontalConnection& h, Sampler& s, double tol = 1e-8);
Report check_connection(const Connection& c, Sampler& s, double tol = 1e-8);
Report check_finsler(const FinslerConnection& f, Sampler& s, double tol = 1e-8);

// K(w,v,y,x) = (w + psi(x).v.y, x) on the tangent bundle of R^n.
VerticalConnection christoffel_vertical(const ChristoffelData& d);
SpacePtr sphere(std::size_t n);
// K(w,v,y,x) = (w + (v.y) x, x) on the tangent bundle of S^n.
VerticalConnection sphere_vertical(std::size_t n);

// K at xi after validating xi in T(E).
std::vector<double> apply_vertical(const VerticalConnection& v, const std::vector<double>& xi, double tol = 1e-9);

VerticalConnection canonical_vertical_diff_object(std::size_t n);
HorizontalConnection canonical_horizontal_diff_object(std::size_t n);
Connection canonical_connection_diff_object(std::size_t n);
// K(w,v,y,x) = (w,x), H((u,x),(y,x)) = (0,u,y,x).
Connection canonical_affine_connection(std::size_t n);

VerticalConnection pullback_vertical(const SmoothMap& f, const SpacePtr& x, const VerticalConnection& v);
HorizontalConnection pullback_horizontal(const SmoothMap& f, const SpacePtr& x, const HorizontalConnection& h);
Connection pullback_connection(const SmoothMap& f, const SpacePtr& x, const Connection& c);

VerticalConnection t_of_vertical(const VerticalConnection& v);
HorizontalConnection t_of_horizontal(const HorizontalConnection& h);
Connection t_of_connection(const Connection& c);

// s: q' -> q and r: q -> q' with s r = 1; the connection moves from q to q'.
VerticalConnection retract_vertical(const VerticalConnection& v, const LinearMorphism& s,
                                    const LinearMorphism& r, Sampler* check = nullptr);
HorizontalConnection retract_horizontal(const HorizontalConnection& h, const LinearMorphism& s,
                                        const LinearMorphism& r, Sampler* check = nullptr);
// Affine case: s: M' -> M, r: M -> M', using (T(s), s) and (T(r), r).
LinearMorphism tangent_morphism(const SmoothMap& f, const DifferentialBundle& src, const DifferentialBundle& dst);
VerticalConnection retract_affine(const VerticalConnection& v, const SpacePtr& sub, const SmoothMap& s,
                                  const SmoothMap& r, Sampler* check = nullptr);
HorizontalConnection retract_affine_horizontal(const HorizontalConnection& h, const SpacePtr& sub,
                                               const SmoothMap& s, const SmoothMap& r, Sampler* check = nullptr);

FinslerConnection vertical_to_finsler(const VerticalConnection& v);
VerticalConnection finsler_to_vertical(const FinslerConnection& f);

// ({1 - UH}, H); K is the closed-form bracket solve.
Connection vertical_from_horizontal(const HorizontalConnection& h);
// (K, J(1 - <K,p> mu)).
Connection horizontal_from_vertical(const VerticalConnection& v, const HorizontalConnection& j);
// Levi-Civita on S^n: the projected vertical connection with H from the retracted flat one.
Connection sphere_connection(std::size_t n);
SmoothMap one_minus_UH(const HorizontalConnection& h);

// w T(s) K; with a sampler, w p = 1 and s q = 1 are validated first.
SmoothMap covariant_derivative(const VerticalConnection& v, const SmoothMap& w, const SmoothMap& s,
                               Sampler* check = nullptr);
void require_vector_field(const SpacePtr& m, const SmoothMap& w, Sampler& s, double tol = 1e-9);
void require_section(const DifferentialBundle& b, const SmoothMap& sec, Sampler& s, double tol = 1e-9);

struct Decomposition {
  std::vector<double> e0;  // K xi
  std::vector<double> t;   // T(q) xi
  std::vector<double> e1;  // p xi
};

SmoothMap decomposition_map(const Connection& c);   // T(E) -> [e0, t, e1]
SmoothMap reconstruction_map(const Connection& c);  // [e0, t, e1] -> T(E)
Decomposition decompose(const Connection& c, const std::vector<double>& xi);
std::vector<double> reconstruct(const Connection& c, const Decomposition& d, double tol = 1e-9);

}  // namespace tconn
