#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tconn/connection.hpp"

namespace tconn {

// An interval [a, b] around 0 with c0 = 0 and the unit field c1(t) = (1, t).
struct CurveObject {
  double a = 0.0;
  double b = 1.0;
  SmoothMap c1() const;
};

CurveObject curve_object(double a, double b);

struct DynamicalSystem {
  SpacePtr space;
  std::vector<double> x0;
  SmoothMap x1;  // M -> T(M)
};

Report check_linear_system(const DynamicalSystem& d, const DifferentialBundle& m, const SmoothMap& b, Sampler& s,
                           double tol = 1e-8);

enum class Method { RK4, Euler };
const char* method_name(Method m);

struct TrajectoryNode {
  double t = 0.0;
  std::vector<double> x;
  double defect = 0.0;  // |x' - x1(x)| with x' from finite differences
};

struct Trajectory {
  Method method = Method::RK4;
  double step = 0.0;
  std::vector<TrajectoryNode> nodes;  // ascending t
  std::size_t origin = 0;             // index of t = 0

  const TrajectoryNode& front() const { return nodes.front(); }
  const TrajectoryNode& back() const { return nodes.back(); }
};

struct SolveOptions {
  Method method = Method::RK4;
  // One Gauss-Newton step back onto the state space after every step.
  bool reproject = false;
};

Trajectory solve(const DynamicalSystem& d, const CurveObject& c, int steps, SolveOptions opt = {});

struct TransportResult {
  Trajectory trajectory;  // states [t, e] of C x_M E
  std::vector<double> final_e;
  Report conditions;      // (i) start, (ii) above gamma, (iii) parallel, fibre membership
};

// The transport field F = <pi0 c1, <pi0 c1 T(gamma), pi1> H> on [t, e].
SmoothMap transport_field(const Connection& c, const SmoothMap& gamma);

TransportResult parallel_transport(const Connection& c, const SmoothMap& gamma, const CurveObject& curve,
                                   const std::vector<double>& e0, int steps, SolveOptions opt = {},
                                   double tol = 1e-9);

struct Holonomy {
  std::vector<double> returned;
  std::optional<double> angle;  // rotation in the plane of the frame
  TransportResult transport;
};

// frame: two orthonormal fibre vectors at the base point (fibre part of E for tangent bundles).
Holonomy holonomy(const Connection& c, const SmoothMap& loop, const CurveObject& curve, const std::vector<double>& e0,
                  int steps, const std::optional<std::pair<std::vector<double>, std::vector<double>>>& frame = {},
                  SolveOptions opt = {}, double tol = 1e-9);

// Order estimate log2(|y1 - y2| / |y2 - y4|) from runs at N, 2N, 4N steps.
double empirical_order(const std::vector<double>& yN, const std::vector<double>& y2N, const std::vector<double>& y4N);

}  // namespace tconn
