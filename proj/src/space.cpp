#include "tconn/space.hpp"

#include <cmath>

#include "tconn/error.hpp"

namespace tconn {

namespace {

std::uint64_t splitmix(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

// xoshiro256** seeded through splitmix64.
Rng::Rng(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix(seed);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform(double lo, double hi) {
  double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

int Rng::integer(int lo, int hi) {
  return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
}

SpacePtr euclidean(std::size_t n, std::string name) {
  auto s = std::make_shared<Space>();
  s->kind = SpaceKind::Euclidean;
  s->dim = n;
  s->name = name.empty() ? "R(" + std::to_string(n) + ")" : std::move(name);
  return s;
}

SpacePtr submanifold(std::size_t ambient, SmoothMap constraint, SmoothMap retraction, std::string name) {
  if (constraint.in_dim() != ambient || retraction.in_dim() != ambient || retraction.out_dim() != ambient)
    throw Error(Errc::DimensionMismatch, "submanifold: constraint/retraction do not act on R(" +
                                             std::to_string(ambient) + ")");
  auto s = std::make_shared<Space>();
  s->kind = SpaceKind::Submanifold;
  s->dim = ambient;
  s->constraint = std::move(constraint);
  s->retraction = std::move(retraction);
  s->name = std::move(name);
  return s;
}

SpacePtr fibre_product(SpacePtr left, SmoothMap left_map, SpacePtr right, SmoothMap right_map,
                       std::string name) {
  if (left_map.in_dim() != left->dim || right_map.in_dim() != right->dim ||
      left_map.out_dim() != right_map.out_dim())
    throw Error(Errc::DimensionMismatch, "fibre product legs do not match");
  const std::size_t a = left->dim, b = right->dim, m = left_map.out_dim();
  auto s = std::make_shared<Space>();
  s->kind = SpaceKind::FibreProduct;
  s->dim = a + b;
  s->name = name.empty() ? left->name + " x " + right->name : std::move(name);

  auto pl = projection(a + b, 0, a);
  auto pr = projection(a + b, a, b);
  std::vector<SmoothMap> parts;
  if (left->constraint) parts.push_back(compose(pl, *left->constraint));
  if (right->constraint) parts.push_back(compose(pr, *right->constraint));
  if (m > 0) {
    Eigen::MatrixXd D(m, 2 * m);
    D << Eigen::MatrixXd::Identity(m, m), -Eigen::MatrixXd::Identity(m, m);
    parts.push_back(compose(pair({compose(pl, left_map), compose(pr, right_map)}), linear_map(D)));
  }
  if (!parts.empty()) s->constraint = pair(parts);
  if (left->retraction || right->retraction)
    s->retraction = product({left->retraction.value_or(identity_map(a)),
                             right->retraction.value_or(identity_map(b))});
  s->left = std::move(left);
  s->right = std::move(right);
  s->left_map = std::move(left_map);
  s->right_map = std::move(right_map);
  return s;
}

SpacePtr tangent_space(const SpacePtr& x, int n) {
  if (n == 0) return x;
  auto s = std::make_shared<Space>(*x);
  s->dim = x->dim << n;
  s->tangent_order = x->tangent_order + n;
  if (x->constraint) s->constraint = tangent(*x->constraint, n);
  if (x->retraction) s->retraction = tangent(*x->retraction, n);
  s->name = "T" + (n > 1 ? "^" + std::to_string(n) : std::string()) + "(" + x->name + ")";
  return s;
}

ConstraintResidual constraint_residual(const Space& s, const std::vector<double>& coords, int depth) {
  const std::size_t expect = s.dim << depth;
  if (coords.size() != expect)
    throw Error(Errc::DimensionMismatch, "point of " + s.name + " needs " + std::to_string(expect) +
                                             " coordinates, got " + std::to_string(coords.size()));
  ConstraintResidual worst;
  worst.residual = 0.0;
  for (double c : coords)
    if (!std::isfinite(c)) {
      worst.residual = INFINITY;
      return worst;
    }
  if (!s.constraint) return worst;
  const std::size_t k = s.constraint->out_dim();
  auto r = s.constraint->eval_flat(depth, coords);
  for (std::size_t idx = 0; idx < r.size(); ++idx) {
    double v = std::abs(r[idx]);
    if (!(v <= worst.residual)) {
      worst.residual = v;
      worst.component = static_cast<int>(idx / k);
      worst.constraint = static_cast<int>(idx % k);
    }
  }
  return worst;
}

ValidatedPoint validate(const SpacePtr& s, std::vector<double> coords, int depth, double tol) {
  ConstraintResidual w = constraint_residual(*s, coords, depth);
  if (!(w.residual <= tol))
    throw Error(Errc::ConstraintViolation, "point not on " + s->name + ": constraint " +
                                               std::to_string(w.constraint) + ", component " +
                                               std::to_string(w.component) + ", residual " +
                                               format_number(w.residual));
  return ValidatedPoint{s, depth, std::move(coords), w};
}

Eigen::MatrixXd jacobian(const SmoothMap& f, const std::vector<double>& x) {
  const std::size_t n = f.in_dim();
  Eigen::MatrixXd J(f.out_dim(), n);
  TangentTower t(1, n);
  for (std::size_t i = 0; i < n; ++i) t.at(0, i) = x[i];
  for (std::size_t j = 0; j < n; ++j) {
    t.at(1, j) = 1.0;
    TangentTower y = f.eval(t);
    for (std::size_t i = 0; i < f.out_dim(); ++i) J(i, j) = y.at(1, i);
    t.at(1, j) = 0.0;
  }
  return J;
}

namespace {

// Gauss-Newton with minimum-norm steps, restricted to the coordinates in `free`.
bool gauss_newton(const SmoothMap& g, std::vector<double>& x, const std::vector<Eigen::Index>& free, int iterations,
                  double target) {
  for (int it = 0; it <= iterations; ++it) {
    auto r = g(x);
    Eigen::Map<Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
    if (rv.size() == 0 || rv.cwiseAbs().maxCoeff() <= target) return true;
    if (it == iterations || !rv.allFinite()) return false;
    Eigen::MatrixXd J = jacobian(g, x);
    Eigen::MatrixXd Jf(J.rows(), static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k) Jf.col(static_cast<Eigen::Index>(k)) = J.col(free[k]);
    Eigen::VectorXd step = Jf.completeOrthogonalDecomposition().solve(-rv);
    for (std::size_t k = 0; k < free.size(); ++k) x[free[k]] += step[static_cast<Eigen::Index>(k)];
  }
  return false;
}

}  // namespace

std::vector<double> project(const Space& s, std::vector<double> x, int iterations, double target) {
  if (s.retraction) x = (*s.retraction)(x);
  if (!s.constraint) return x;
  // Fibre products: settle the left leg, then move only the right leg onto the constraint.
  // This keeps samples near the ambient box instead of letting both legs drift.
  if (s.kind == SpaceKind::FibreProduct && s.left && s.right) {
    const std::size_t a = s.left->dim, b = s.right->dim, block = a + b;
    const std::size_t comps = s.dim / block;
    int order = 0;
    while ((std::size_t{1} << order) < comps) ++order;
    std::vector<double> left;
    std::vector<Eigen::Index> right_idx;
    for (std::size_t c = 0; c < comps; ++c) {
      for (std::size_t i = 0; i < a; ++i) left.push_back(x[c * block + i]);
      for (std::size_t i = 0; i < b; ++i) right_idx.push_back(static_cast<Eigen::Index>(c * block + a + i));
    }
    left = project(*tangent_space(s.left, order), std::move(left), iterations, target);
    auto staged = x;
    for (std::size_t c = 0; c < comps; ++c)
      for (std::size_t i = 0; i < a; ++i) staged[c * block + i] = left[c * a + i];
    if (gauss_newton(*s.constraint, staged, right_idx, iterations, target)) return staged;
  }
  std::vector<Eigen::Index> all(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) all[i] = static_cast<Eigen::Index>(i);
  gauss_newton(*s.constraint, x, all, iterations, target);
  return x;
}

std::vector<ValidatedPoint> sample(const SpacePtr& s, int depth, std::uint64_t seed, int count, double tol) {
  SpacePtr target = tangent_space(s, depth);
  if (target->kind == SpaceKind::Submanifold && !target->retraction)
    throw Error(Errc::PreconditionFailed, "sampling " + s->name + " needs a retraction");
  Rng rng(seed);
  std::vector<ValidatedPoint> out;
  for (int c = 0; c < count; ++c) {
    bool ok = false;
    for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
      std::vector<double> x(target->dim);
      for (double& v : x) v = rng.uniform(-2.0, 2.0);
      try {
        x = project(*target, std::move(x));
      } catch (const Error& e) {
        if (e.code() != Errc::DomainError) throw;
        continue;
      }
      ConstraintResidual w = constraint_residual(*target, x, 0);
      if (w.residual <= tol) {
        ValidatedPoint p{s, depth, std::move(x), w};
        out.push_back(std::move(p));
        ok = true;
      }
    }
    if (!ok)
      throw Error(Errc::SamplingFailed, "no valid point of " + target->name + " after 10 attempts");
  }
  return out;
}

}  // namespace tconn
