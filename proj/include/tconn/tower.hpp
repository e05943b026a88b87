#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tconn {

// Component index: bit (i-1) set iff tangent slot i is in the subset.
using Mask = std::uint32_t;

// An element of T^n(R^k). Components are stored by ascending mask; the
// flat wire format is descending mask, so for n=2 it reads (w,v,y,x).
class TangentTower {
 public:
  TangentTower() = default;
  TangentTower(int depth, std::size_t dim);

  static TangentTower point(std::span<const double> x);
  static TangentTower unflatten(int depth, std::size_t dim, std::span<const double> flat);
  std::vector<double> flatten() const;

  int depth() const { return depth_; }
  std::size_t dim() const { return dim_; }
  std::size_t components() const { return std::size_t{1} << depth_; }

  std::span<double> component(Mask s) { return {data_.data() + s * dim_, dim_}; }
  std::span<const double> component(Mask s) const { return {data_.data() + s * dim_, dim_}; }
  double& at(Mask s, std::size_t j) { return data_[s * dim_ + j]; }
  double at(Mask s, std::size_t j) const { return data_[s * dim_ + j]; }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  bool operator==(const TangentTower&) const = default;

 private:
  int depth_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

double max_abs_diff(const TangentTower& a, const TangentTower& b);

// Structural operations. Slots are 1-based and count from the innermost T.
TangentTower t_proj(const TangentTower& t, int slot);
// Inserts a zero slot which becomes slot `slot` (1..depth+1); higher slots shift up.
TangentTower t_zero(const TangentTower& t, int slot);
TangentTower t_add(const TangentTower& a, const TangentTower& b, int slot);
// Negates the components containing `slot` (fibre negation over that slot).
TangentTower t_neg(const TangentTower& t, int slot);
// Lifts `slot`; the new slot is slot+1 and higher slots shift up.
TangentTower t_lift(const TangentTower& t, int slot);
TangentTower t_flip(const TangentTower& t, int i, int j);

// Concatenates towers of equal depth component by component:
// the iso T^n(X) x T^n(Y) -> T^n(X x Y).
TangentTower t_concat(std::span<const TangentTower> parts);
TangentTower t_slice(const TangentTower& t, std::size_t offset, std::size_t len);

}  // namespace tconn
