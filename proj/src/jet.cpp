#include "tconn/jet.hpp"

#include <cmath>

namespace tconn {

Jet::Jet(int depth, double value) : depth_(depth), c_(std::size_t{1} << depth, 0.0) {
  c_[0] = value;
}

Jet& Jet::operator+=(const Jet& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(double k) {
  for (double& v : c_) v *= k;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet out(a.depth_, 0.0);
  const Mask n = static_cast<Mask>(a.c_.size());
  for (Mask s = 0; s < n; ++s) {
    double acc = 0.0;
    // Walk all submasks A of s, pairing a[A] with b[s \ A].
    for (Mask sub = s;; sub = (sub - 1) & s) {
      acc += a.c_[sub] * b.c_[s ^ sub];
      if (sub == 0) break;
    }
    out.c_[s] = acc;
  }
  return out;
}

bool Jet::nilpotent_part_zero() const {
  for (std::size_t i = 1; i < c_.size(); ++i)
    if (c_[i] != 0.0) return false;
  return true;
}

Jet apply_series(const Jet& a, const std::vector<double>& derivs) {
  Jet out(a.depth(), derivs[0]);
  if (a.nilpotent_part_zero()) return out;
  Jet nil = a;
  nil[0] = 0.0;
  Jet power = nil;
  double factorial = 1.0;
  for (int k = 1; k <= a.depth(); ++k) {
    factorial *= k;
    out += power * (derivs[k] / factorial);
    if (k < a.depth()) power = power * nil;
  }
  return out;
}

Jet sin(const Jet& a) {
  std::vector<double> d(a.depth() + 1);
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cycle[4] = {s, c, -s, -c};
  for (int k = 0; k <= a.depth(); ++k) d[k] = cycle[k % 4];
  return apply_series(a, d);
}

Jet cos(const Jet& a) {
  std::vector<double> d(a.depth() + 1);
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cycle[4] = {c, -s, -c, s};
  for (int k = 0; k <= a.depth(); ++k) d[k] = cycle[k % 4];
  return apply_series(a, d);
}

Jet exp(const Jet& a) {
  return apply_series(a, std::vector<double>(a.depth() + 1, std::exp(a.value())));
}

Jet sqrt(const Jet& a) {
  std::vector<double> d(a.depth() + 1);
  const double x = a.value();
  double coeff = 1.0;
  for (int k = 0; k <= a.depth(); ++k) {
    d[k] = coeff * std::pow(x, 0.5 - k);
    coeff *= 0.5 - k;
  }
  if (x == 0.0) return Jet(a.depth(), 0.0);
  return apply_series(a, d);
}

Jet reciprocal(const Jet& a) {
  std::vector<double> d(a.depth() + 1);
  const double x = a.value();
  double coeff = 1.0;
  for (int k = 0; k <= a.depth(); ++k) {
    d[k] = coeff / std::pow(x, k + 1);
    coeff *= -(k + 1);
  }
  return apply_series(a, d);
}

Jet pow(const Jet& a, int k) {
  if (k < 0) return reciprocal(pow(a, -k));
  Jet result(a.depth(), 1.0);
  Jet base = a;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return result;
}

}  // namespace tconn
