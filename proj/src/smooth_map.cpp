#include "tconn/smooth_map.hpp"

#include <cmath>
#include <functional>

#include "tconn/error.hpp"

namespace tconn {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::DimensionMismatch, what);
}

class ExprNode final : public MapNode {
 public:
  ExprNode(std::size_t in, std::vector<ExprPtr> body, std::size_t out)
      : MapNode(in, out), body(std::move(body)) {}

  TangentTower eval(const TangentTower& t) const override {
    const int n = t.depth();
    std::vector<Jet> x(in_dim, Jet(n, 0.0));
    for (std::size_t i = 0; i < in_dim; ++i)
      for (Mask s = 0; s < t.components(); ++s) x[i][s] = t.at(s, i);
    TangentTower out(n, out_dim);
    std::size_t k = 0;
    for (const auto& e : body)
      for (const Jet& j : evaluate(*e, x, n)) {
        for (Mask s = 0; s < out.components(); ++s) out.at(s, k) = j[s];
        ++k;
      }
    return out;
  }

  std::vector<ExprPtr> body;
};

class AffineNode final : public MapNode {
 public:
  explicit AffineNode(AffineData d)
      : MapNode(d.A.cols(), d.A.rows()), data(std::move(d)) {}

  TangentTower eval(const TangentTower& t) const override {
    TangentTower out(t.depth(), out_dim);
    for (Mask s = 0; s < t.components(); ++s) {
      Eigen::Map<const Eigen::VectorXd> in(t.component(s).data(), in_dim);
      Eigen::Map<Eigen::VectorXd> o(out.component(s).data(), out_dim);
      o.noalias() = data.A * in;
      if (s == 0) o += data.b;
    }
    return out;
  }

  AffineData data;
};

class ComposeNode final : public MapNode {
 public:
  ComposeNode(SmoothMap f, SmoothMap g)
      : MapNode(f.in_dim(), g.out_dim()), f(std::move(f)), g(std::move(g)) {}
  TangentTower eval(const TangentTower& t) const override { return g.eval(f.eval(t)); }
  SmoothMap f, g;
};

class PairNode final : public MapNode {
 public:
  PairNode(std::vector<SmoothMap> fs, std::size_t in, std::size_t out)
      : MapNode(in, out), fs(std::move(fs)) {}
  TangentTower eval(const TangentTower& t) const override {
    std::vector<TangentTower> parts;
    parts.reserve(fs.size());
    for (const auto& f : fs) parts.push_back(f.eval(t));
    return t_concat(parts);
  }
  std::vector<SmoothMap> fs;
};

// T(f) on T^n(T X): the tangent slot of T(f) is the innermost slot of the
// depth n+1 tower over X, and the tower's own slots shift up by one.
class TangentNode final : public MapNode {
 public:
  explicit TangentNode(SmoothMap f) : MapNode(2 * f.in_dim(), 2 * f.out_dim()), f(std::move(f)) {}

  TangentTower eval(const TangentTower& t) const override {
    const std::size_t a = f.in_dim(), b = f.out_dim();
    TangentTower u(t.depth() + 1, a);
    for (Mask s = 0; s < t.components(); ++s) {
      auto c = t.component(s);
      std::copy_n(c.begin(), a, u.component((s << 1) | 1).begin());
      std::copy_n(c.begin() + a, a, u.component(s << 1).begin());
    }
    TangentTower v = f.eval(u);
    TangentTower out(t.depth(), 2 * b);
    for (Mask s = 0; s < out.components(); ++s) {
      auto o = out.component(s);
      auto top = v.component((s << 1) | 1);
      auto base = v.component(s << 1);
      std::copy(top.begin(), top.end(), o.begin());
      std::copy(base.begin(), base.end(), o.begin() + b);
    }
    return out;
  }

  SmoothMap f;
};

class NormalizeNode final : public MapNode {
 public:
  explicit NormalizeNode(std::size_t d) : MapNode(d, d) {}
  TangentTower eval(const TangentTower& t) const override {
    const int n = t.depth();
    std::vector<Jet> x(in_dim, Jet(n, 0.0));
    Jet norm2(n, 0.0);
    for (std::size_t i = 0; i < in_dim; ++i) {
      for (Mask s = 0; s < t.components(); ++s) x[i][s] = t.at(s, i);
      norm2 += x[i] * x[i];
    }
    if (!(norm2.value() > 1e-24))
      throw Error(Errc::DomainError, "normalize: vector of (near) zero length");
    Jet r = reciprocal(sqrt(norm2));
    TangentTower out(n, out_dim);
    for (std::size_t i = 0; i < in_dim; ++i) {
      Jet y = x[i] * r;
      for (Mask s = 0; s < out.components(); ++s) out.at(s, i) = y[s];
    }
    return out;
  }
};

SmoothMap from_tower_op(std::size_t in_flat, const std::function<std::vector<double>(std::span<const double>)>& op) {
  std::vector<double> e(in_flat, 0.0);
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < in_flat; ++j) {
    e[j] = 1.0;
    cols.push_back(op(e));
    e[j] = 0.0;
  }
  const std::size_t rows = in_flat ? cols[0].size() : op(e).size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, in_flat);
  for (std::size_t j = 0; j < in_flat; ++j)
    for (std::size_t i = 0; i < rows; ++i) A(i, j) = cols[j][i];
  return linear_map(std::move(A));
}

std::size_t tower_size(std::size_t dim, int depth) { return (std::size_t{1} << depth) * dim; }

}  // namespace

SmoothMap::SmoothMap(std::shared_ptr<const MapNode> node, std::string name)
    : node_(std::move(node)), name_(std::move(name)) {}

TangentTower SmoothMap::eval(const TangentTower& t) const {
  if (t.dim() != in_dim())
    throw Error(Errc::DimensionMismatch, "map " + (name_.empty() ? std::string("<anon>") : name_) +
                                             " expects dim " + std::to_string(in_dim()) + ", got " +
                                             std::to_string(t.dim()));
  return node_->eval(t);
}

std::vector<double> SmoothMap::operator()(std::span<const double> x) const {
  return eval(TangentTower::point(x)).raw();
}

std::vector<double> SmoothMap::eval_flat(int depth, std::span<const double> flat) const {
  return eval(TangentTower::unflatten(depth, in_dim(), flat)).flatten();
}

const AffineData* SmoothMap::affine() const {
  auto* n = dynamic_cast<const AffineNode*>(node_.get());
  return n ? &n->data : nullptr;
}

const std::vector<ExprPtr>* SmoothMap::body() const {
  auto* n = dynamic_cast<const ExprNode*>(node_.get());
  return n ? &n->body : nullptr;
}

SmoothMap expr_map(std::size_t in_dim, std::vector<ExprPtr> body, std::string name) {
  std::size_t out = 0;
  for (const auto& e : body) {
    if (max_var(*e) >= static_cast<int>(in_dim))
      throw Error(Errc::ArityMismatch, "component index " + std::to_string(max_var(*e)) +
                                           " out of range for input dimension " + std::to_string(in_dim));
    out += e->width;
  }
  return SmoothMap(std::make_shared<ExprNode>(in_dim, std::move(body), out), std::move(name));
}

SmoothMap affine_map(Eigen::MatrixXd A, Eigen::VectorXd b) {
  require(b.size() == A.rows(), "affine_map: offset length");
  return SmoothMap(std::make_shared<AffineNode>(AffineData{std::move(A), std::move(b)}));
}

SmoothMap linear_map(Eigen::MatrixXd A) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(A.rows());
  return affine_map(std::move(A), std::move(b));
}

SmoothMap constant_map(std::size_t in_dim, std::vector<double> values) {
  Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
  return affine_map(Eigen::MatrixXd::Zero(values.size(), in_dim), std::move(b));
}

SmoothMap identity_map(std::size_t dim) { return linear_map(Eigen::MatrixXd::Identity(dim, dim)); }

SmoothMap projection(std::size_t total, std::size_t offset, std::size_t len) {
  require(offset + len <= total, "projection out of range");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(len, total);
  for (std::size_t i = 0; i < len; ++i) A(i, offset + i) = 1.0;
  return linear_map(std::move(A));
}

SmoothMap normalize_map(std::size_t dim) {
  return SmoothMap(std::make_shared<NormalizeNode>(dim), "normalize");
}

SmoothMap compose(const SmoothMap& f, const SmoothMap& g) {
  require(f.out_dim() == g.in_dim(), "compose: " + std::to_string(f.out_dim()) + " -> " +
                                         std::to_string(g.in_dim()));
  const AffineData* a = f.affine();
  const AffineData* b = g.affine();
  if (a && b) return affine_map(b->A * a->A, b->A * a->b + b->b);
  return SmoothMap(std::make_shared<ComposeNode>(f, g));
}

SmoothMap compose(std::initializer_list<SmoothMap> chain) {
  auto it = chain.begin();
  SmoothMap acc = *it++;
  for (; it != chain.end(); ++it) acc = compose(acc, *it);
  return acc;
}

SmoothMap pair(std::vector<SmoothMap> fs) {
  require(!fs.empty(), "pair of nothing");
  std::size_t in = fs[0].in_dim(), out = 0;
  bool all_affine = true;
  for (const auto& f : fs) {
    require(f.in_dim() == in, "pair: legs have different domains");
    out += f.out_dim();
    all_affine = all_affine && f.affine();
  }
  if (all_affine) {
    Eigen::MatrixXd A(out, in);
    Eigen::VectorXd b(out);
    std::size_t r = 0;
    for (const auto& f : fs) {
      A.middleRows(r, f.out_dim()) = f.affine()->A;
      b.segment(r, f.out_dim()) = f.affine()->b;
      r += f.out_dim();
    }
    return affine_map(std::move(A), std::move(b));
  }
  return SmoothMap(std::make_shared<PairNode>(std::move(fs), in, out));
}

SmoothMap product(std::vector<SmoothMap> fs) {
  std::size_t total = 0;
  for (const auto& f : fs) total += f.in_dim();
  std::vector<SmoothMap> legs;
  std::size_t off = 0;
  for (const auto& f : fs) {
    legs.push_back(compose(projection(total, off, f.in_dim()), f));
    off += f.in_dim();
  }
  return pair(std::move(legs));
}

SmoothMap tangent(const SmoothMap& f, int times) {
  SmoothMap g = f;
  for (int k = 0; k < times; ++k) {
    if (const AffineData* a = g.affine()) {
      const auto r = a->A.rows(), c = a->A.cols();
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * r, 2 * c);
      A.topLeftCorner(r, c) = a->A;
      A.bottomRightCorner(r, c) = a->A;
      Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * r);
      b.tail(r) = a->b;
      g = affine_map(std::move(A), std::move(b));
    } else {
      g = SmoothMap(std::make_shared<TangentNode>(g));
    }
  }
  return g;
}

SmoothMap tower_pair(int n, std::vector<SmoothMap> fs) {
  const std::size_t comps = std::size_t{1} << n;
  std::vector<std::size_t> dims;
  std::size_t total = 0;
  for (const auto& f : fs) {
    require(f.out_dim() % comps == 0, "tower_pair: leg is not a T^n point");
    dims.push_back(f.out_dim() / comps);
    total += dims.back();
  }
  // Permutation from [T^n X1 flat, T^n X2 flat, ...] to T^n(X1 x X2 x ...) flat.
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(comps * total, comps * total);
  std::size_t src_block = 0, dst_off = 0;
  for (std::size_t d : dims) {
    for (std::size_t p = 0; p < comps; ++p)
      for (std::size_t j = 0; j < d; ++j) P(p * total + dst_off + j, src_block + p * d + j) = 1.0;
    src_block += comps * d;
    dst_off += d;
  }
  return compose(pair(std::move(fs)), linear_map(std::move(P)));
}

SmoothMap p_map(std::size_t dim, int depth, int slot) {
  return from_tower_op(tower_size(dim, depth), [&](std::span<const double> x) {
    return t_proj(TangentTower::unflatten(depth, dim, x), slot).flatten();
  });
}

SmoothMap zero_map(std::size_t dim, int depth, int slot) {
  return from_tower_op(tower_size(dim, depth), [&](std::span<const double> x) {
    return t_zero(TangentTower::unflatten(depth, dim, x), slot).flatten();
  });
}

SmoothMap lift_map(std::size_t dim, int depth, int slot) {
  return from_tower_op(tower_size(dim, depth), [&](std::span<const double> x) {
    return t_lift(TangentTower::unflatten(depth, dim, x), slot).flatten();
  });
}

SmoothMap flip_map(std::size_t dim, int depth, int i, int j) {
  return from_tower_op(tower_size(dim, depth), [&](std::span<const double> x) {
    return t_flip(TangentTower::unflatten(depth, dim, x), i, j).flatten();
  });
}

SmoothMap neg_map(std::size_t dim, int depth, int slot) {
  return from_tower_op(tower_size(dim, depth), [&](std::span<const double> x) {
    return t_neg(TangentTower::unflatten(depth, dim, x), slot).flatten();
  });
}

// Sums components containing `slot` and keeps the first summand elsewhere;
// the shared-component precondition is the caller's responsibility.
SmoothMap add_map(std::size_t dim, int depth, int slot) {
  const std::size_t n = tower_size(dim, depth);
  return from_tower_op(2 * n, [&](std::span<const double> x) {
    auto a = TangentTower::unflatten(depth, dim, x.subspan(0, n));
    auto b = TangentTower::unflatten(depth, dim, x.subspan(n, n));
    const Mask bit = Mask{1} << (slot - 1);
    for (Mask s = 0; s < a.components(); ++s)
      if (s & bit)
        for (std::size_t j = 0; j < dim; ++j) a.at(s, j) += b.at(s, j);
    return a.flatten();
  });
}

SmoothMap fibre_add(const SmoothMap& f, const SmoothMap& g, std::size_t dim, int depth, int slot) {
  return compose(pair({f, g}), add_map(dim, depth, slot));
}

SmoothMap fibre_sub(const SmoothMap& f, const SmoothMap& g, std::size_t dim, int depth, int slot) {
  return compose(pair({f, compose(g, neg_map(dim, depth, slot))}), add_map(dim, depth, slot));
}

}  // namespace tconn
