#pragma once

#include <vector>

#include "tconn/tower.hpp"

namespace tconn {

// A scalar of R[e1..en]/(ei^2), coefficients indexed by subset mask.
class Jet {
 public:
  Jet() = default;
  Jet(int depth, double value);

  int depth() const { return depth_; }
  std::size_t size() const { return c_.size(); }
  double value() const { return c_[0]; }
  double& operator[](Mask s) { return c_[s]; }
  double operator[](Mask s) const { return c_[s]; }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double k);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double k) { return a *= k; }
  friend Jet operator-(Jet a) { return a *= -1.0; }
  friend Jet operator*(const Jet& a, const Jet& b);

  bool nilpotent_part_zero() const;

 private:
  int depth_ = 0;
  std::vector<double> c_{0.0};
};

// f(a) = sum_k f^(k)(a0)/k! N^k where N is the nilpotent part of a.
// derivs[k] must hold f^(k)(a0) for k = 0..a.depth().
Jet apply_series(const Jet& a, const std::vector<double>& derivs);

Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet exp(const Jet& a);
// Callers guard the domain: a.value() > 0, or a == 0 exactly.
Jet sqrt(const Jet& a);
Jet reciprocal(const Jet& a);
Jet pow(const Jet& a, int k);

}  // namespace tconn
