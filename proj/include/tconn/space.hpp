#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tconn/smooth_map.hpp"

namespace tconn {

enum class SpaceKind { Euclidean, Submanifold, FibreProduct };

struct Space;
using SpacePtr = std::shared_ptr<const Space>;

// Every space is a subset of its flat ambient R^dim cut out by `constraint`.
// Fibre products carry their legs for reference but are checked through the
// same combined constraint.
struct Space {
  SpaceKind kind = SpaceKind::Euclidean;
  std::string name;
  std::size_t dim = 0;
  int tangent_order = 0;
  std::optional<SmoothMap> constraint;
  std::optional<SmoothMap> retraction;
  SpacePtr left, right;
  SmoothMap left_map, right_map;
};

SpacePtr euclidean(std::size_t n, std::string name = {});
SpacePtr submanifold(std::size_t ambient, SmoothMap constraint, SmoothMap retraction,
                     std::string name = {});
SpacePtr fibre_product(SpacePtr left, SmoothMap left_map, SpacePtr right, SmoothMap right_map,
                       std::string name = {});
SpacePtr tangent_space(const SpacePtr& x, int n = 1);

struct ConstraintResidual {
  int constraint = -1;  // which constraint output
  int component = -1;   // flat (descending) tower component
  double residual = 0.0;
};

struct ValidatedPoint {
  SpacePtr space;
  int depth = 0;
  std::vector<double> coords;
  ConstraintResidual worst;
};

// Worst residual of T^depth(constraint) at coords; zero for unconstrained spaces.
ConstraintResidual constraint_residual(const Space& s, const std::vector<double>& coords, int depth = 0);
ValidatedPoint validate(const SpacePtr& s, std::vector<double> coords, int depth = 0, double tol = 1e-9);

// Retraction then Gauss-Newton onto the constraint (minimum-norm steps).
std::vector<double> project(const Space& s, std::vector<double> x, int iterations = 30,
                            double target = 1e-14);

// Deterministic for a given seed; ambient draws are uniform in [-2, 2].
std::vector<ValidatedPoint> sample(const SpacePtr& s, int depth, std::uint64_t seed, int count,
                                   double tol = 1e-9);

// Dense Jacobian of f at x, columns by input coordinate.
Eigen::MatrixXd jacobian(const SmoothMap& f, const std::vector<double>& x);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  double uniform(double lo, double hi);
  int integer(int lo, int hi);  // inclusive

 private:
  std::uint64_t s_[4];
};

}  // namespace tconn
