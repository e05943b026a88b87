#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tconn/expr.hpp"
#include "tconn/tower.hpp"

namespace tconn {

class MapNode {
 public:
  MapNode(std::size_t in, std::size_t out) : in_dim(in), out_dim(out) {}
  virtual ~MapNode() = default;
  virtual TangentTower eval(const TangentTower& t) const = 0;

  std::size_t in_dim;
  std::size_t out_dim;
};

// An affine map x -> A x + b. Towers pass through componentwise, with b
// added only to the base component.
struct AffineData {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

// A morphism R^in -> R^out of the concrete tangent category. Evaluating on a
// depth-n tower computes T^n(f).
class SmoothMap {
 public:
  SmoothMap() = default;
  explicit SmoothMap(std::shared_ptr<const MapNode> node, std::string name = {});

  std::size_t in_dim() const { return node_->in_dim; }
  std::size_t out_dim() const { return node_->out_dim; }
  const std::string& name() const { return name_; }
  SmoothMap named(std::string name) const { return SmoothMap(node_, std::move(name)); }
  bool valid() const { return node_ != nullptr; }

  TangentTower eval(const TangentTower& t) const;
  std::vector<double> operator()(std::span<const double> x) const;
  std::vector<double> operator()(std::initializer_list<double> x) const {
    return (*this)(std::span<const double>(x.begin(), x.size()));
  }
  // T^depth(f) on flat descending-mask coordinates.
  std::vector<double> eval_flat(int depth, std::span<const double> flat) const;

  // Non-null when the map is affine in flat coordinates.
  const AffineData* affine() const;
  // Non-null for maps defined by an expression body.
  const std::vector<ExprPtr>* body() const;
  const MapNode* node() const { return node_.get(); }

 private:
  std::shared_ptr<const MapNode> node_;
  std::string name_;
};

SmoothMap expr_map(std::size_t in_dim, std::vector<ExprPtr> body, std::string name = {});
SmoothMap affine_map(Eigen::MatrixXd A, Eigen::VectorXd b);
SmoothMap linear_map(Eigen::MatrixXd A);
SmoothMap constant_map(std::size_t in_dim, std::vector<double> values);
SmoothMap identity_map(std::size_t dim);
SmoothMap projection(std::size_t total, std::size_t offset, std::size_t len);
SmoothMap normalize_map(std::size_t dim);

// Diagrammatic order: compose(f, g) is "f then g".
SmoothMap compose(const SmoothMap& f, const SmoothMap& g);
SmoothMap compose(std::initializer_list<SmoothMap> chain);
// <f, g, ...>: outputs concatenated.
SmoothMap pair(std::vector<SmoothMap> fs);
// f x g on concatenated inputs.
SmoothMap product(std::vector<SmoothMap> fs);
SmoothMap tangent(const SmoothMap& f, int times = 1);
// <f, g, ...> into T^n(X x Y x ...) where each f lands in T^n of its factor.
SmoothMap tower_pair(int n, std::vector<SmoothMap> fs);

// Structural transformations on T^depth(X), X of flat dimension dim.
SmoothMap p_map(std::size_t dim, int depth, int slot);
SmoothMap zero_map(std::size_t dim, int depth, int slot);
SmoothMap lift_map(std::size_t dim, int depth, int slot);
SmoothMap flip_map(std::size_t dim, int depth, int i, int j);
// Input: two flat T^depth(X) points concatenated.
SmoothMap add_map(std::size_t dim, int depth, int slot);
SmoothMap neg_map(std::size_t dim, int depth, int slot);

// Pointwise fibre sum/difference of maps into T^depth(X) over `slot`.
SmoothMap fibre_add(const SmoothMap& f, const SmoothMap& g, std::size_t dim, int depth, int slot);
SmoothMap fibre_sub(const SmoothMap& f, const SmoothMap& g, std::size_t dim, int depth, int slot);

}  // namespace tconn
