#pragma once

#include <cmath>
#include <vector>

#include "tconn/space.hpp"
#include "tconn/tower.hpp"

namespace testing {

inline std::vector<double> v(std::initializer_list<double> xs) { return xs; }

inline double diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline tconn::TangentTower random_tower(tconn::Rng& rng, int depth, std::size_t dim) {
  tconn::TangentTower t(depth, dim);
  for (double& x : t.raw()) x = rng.uniform(-2.0, 2.0);
  return t;
}

}  // namespace testing
