#pragma once

#include <string>
#include <vector>

#include "tconn/report.hpp"
#include "tconn/smooth_map.hpp"
#include "tconn/space.hpp"

namespace tconn {

// (q, +_q, 0_q, lambda) with total space E over base M, all in flat coordinates.
// E2 = E x_M E is stored as the concatenation [e, e'].
struct DifferentialBundle {
  std::string name;
  SpacePtr total;
  SpacePtr base;
  SmoothMap q;       // E -> M
  SmoothMap plus;    // E2 -> E
  SmoothMap zero;    // M -> E
  SmoothMap lambda;  // E -> T(E)
  // Set when this is the tangent bundle of `tangent_of`.
  SpacePtr tangent_of;

  // Derived objects, filled by finish_bundle.
  SpacePtr E2, E3, TE, TM, TM_x_E;

  std::size_t dE() const { return total->dim; }
  std::size_t dM() const { return base->dim; }
  bool is_affine() const { return tangent_of != nullptr; }

  // mu = <pi0 lambda, pi1 0> T(+_q): E2 -> T(E)
  SmoothMap mu() const;
  // U = <T(q), p>: T(E) -> T(M) x_M E
  SmoothMap U() const;
  // p: T(E) -> E
  SmoothMap p_E() const;
  SmoothMap pi0() const;  // E2 -> E
  SmoothMap pi1() const;
  // Fibre negation e -> -e over q(e) and subtraction E2 -> E.
  SmoothMap negate() const;
  SmoothMap subtract() const;
  // Pointwise q-fibre sum / difference of two maps into E.
  SmoothMap add_maps(const SmoothMap& f, const SmoothMap& g) const;
  SmoothMap sub_maps(const SmoothMap& f, const SmoothMap& g) const;
};

DifferentialBundle finish_bundle(DifferentialBundle b);

DifferentialBundle tangent_bundle(const SpacePtr& m);
DifferentialBundle t_of_bundle(const DifferentialBundle& b);
DifferentialBundle pullback_bundle(const SmoothMap& f, const SpacePtr& x, const DifferentialBundle& b);
DifferentialBundle whitney_sum(const DifferentialBundle& a, const DifferentialBundle& b);
DifferentialBundle finsler_bundle(const DifferentialBundle& b);
// R^n as a differential bundle over the terminal object R(0).
DifferentialBundle differential_object(std::size_t n);
DifferentialBundle trivial_bundle(std::size_t n, const SpacePtr& m);

Report check_bundle(const DifferentialBundle& b, Sampler& s, double tol = 1e-9);

// Smallest relative singular value of the stacked fibre system [d mu/d e; dq] over E2 samples.
Report universality_check(const DifferentialBundle& b, Sampler& s, double min_sigma = 1e-6);

struct BracketResult {
  std::vector<double> e;    // {f}(x)
  std::vector<double> e2;   // f_{|mu}(x) in E2
  double residual = 0.0;    // |mu(e2) - f(x)|
  double precondition = 0.0;
};

// Least-squares solve of mu(e2) = f(x), written {f}.
BracketResult bracket(const DifferentialBundle& b, const SmoothMap& f, const std::vector<double>& x,
                      double tol = 1e-8);
// Closed form of mu^-1 pi0 as a map T(E) -> E; requires affine mu and q.
SmoothMap bracket_solver(const DifferentialBundle& b);
// {f} as a map: f followed by the closed-form solver.
SmoothMap bracket_map(const DifferentialBundle& b, const SmoothMap& f);

struct LinearMorphism {
  SmoothMap f1;  // E -> E'
  SmoothMap f0;  // M -> M'
  DifferentialBundle src;
  DifferentialBundle dst;
};

Report check_linear(const LinearMorphism& m, Sampler& s, double tol = 1e-9);

}  // namespace tconn
