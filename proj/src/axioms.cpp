#include "tconn/axioms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "tconn/error.hpp"
#include "tconn/space.hpp"

namespace tconn {

namespace {

double relative(const TangentTower& a, const TangentTower& b) {
  if (a.depth() != b.depth() || a.dim() != b.dim()) return INFINITY;
  double scale = 1.0, worst = 0.0;
  const auto &x = a.raw(), &y = b.raw();
  for (std::size_t i = 0; i < x.size(); ++i) {
    scale = std::max(scale, std::abs(x[i]));
    worst = std::max(worst, std::abs(x[i] - y[i]));
  }
  return worst / scale;
}

TangentTower random_tower(Rng& rng, int depth, std::size_t dim) {
  TangentTower t(depth, dim);
  for (double& x : t.raw()) x = rng.uniform(-2.0, 2.0);
  return t;
}

// Same base point, fresh components above `slot`.
TangentTower same_base(Rng& rng, const TangentTower& t, int slot) {
  auto u = t;
  for (Mask s = 0; s < u.components(); ++s)
    if (s & (Mask{1} << (slot - 1)))
      for (double& x : u.component(s)) x = rng.uniform(-2.0, 2.0);
  return u;
}

struct Tracker {
  ReportItem item;
  void record(double r, const TangentTower& at) {
    if (!(r <= item.max_residual)) {
      item.max_residual = r;
      item.worst_point = at.flatten();
    }
  }
};

}  // namespace

Report tangent_axioms(const std::vector<SmoothMap>& maps, std::uint64_t seed, int towers, double tol) {
  Report r;
  r.command = "axioms";
  r.tol = tol;
  Rng rng(seed);

  std::vector<Tracker> ids(6);
  const char* names[] = {"c c = 1", "l c = l", "l p = p 0", "l T(c) c = c T(l)", "0 p = 1", "+ p = pi0 p"};
  for (int i = 0; i < 6; ++i) ids[i].item.equation = names[i];
  for (int k = 0; k < towers; ++k) {
    const std::size_t dim = static_cast<std::size_t>(rng.integer(1, 3));
    auto t1 = random_tower(rng, 1, dim);
    auto t2 = random_tower(rng, 2, dim);
    ids[0].record(relative(t_flip(t_flip(t2, 1, 2), 1, 2), t2), t2);
    ids[1].record(relative(t_flip(t_lift(t1, 1), 1, 2), t_lift(t1, 1)), t1);
    ids[2].record(relative(t_proj(t_lift(t1, 1), 2), t_zero(t_proj(t1, 1), 1)), t1);
    ids[3].record(relative(t_flip(t_flip(t_lift(t2, 2), 1, 2), 2, 3), t_lift(t_flip(t2, 1, 2), 1)), t2);
    ids[4].record(relative(t_proj(t_zero(t1, 2), 2), t1), t1);
    auto u = same_base(rng, t1, 1);
    ids[5].record(relative(t_proj(t_add(t1, u, 1), 1), t_proj(t1, 1)), t1);
  }
  for (auto& t : ids) r.items.push_back(t.item);

  for (std::size_t m = 0; m < maps.size(); ++m) {
    const auto& f = maps[m];
    const std::string tag = f.name().empty() ? "f" + std::to_string(m) : f.name();
    std::vector<Tracker> nat(5);
    const char* ops[] = {"p", "0", "+", "l", "c"};
    for (int i = 0; i < 5; ++i) nat[i].item.equation = std::string(ops[i]) + " natural for " + tag;
    for (int k = 0; k < towers; ++k) {
      // Resample when the map leaves its domain at a random point.
      for (int attempt = 0;; ++attempt) {
        const int depth = rng.integer(1, 2);
        const int slot = rng.integer(1, depth);
        auto t = random_tower(rng, depth, f.in_dim());
        auto u = same_base(rng, t, slot);
        try {
          auto ft = f.eval(t);
          nat[0].record(relative(f.eval(t_proj(t, slot)), t_proj(ft, slot)), t);
          nat[1].record(relative(f.eval(t_zero(t, slot)), t_zero(ft, slot)), t);
          nat[2].record(relative(f.eval(t_add(t, u, slot)), t_add(ft, f.eval(u), slot)), t);
          nat[3].record(relative(f.eval(t_lift(t, slot)), t_lift(ft, slot)), t);
          auto t2 = depth == 2 ? t : random_tower(rng, 2, f.in_dim());
          nat[4].record(relative(f.eval(t_flip(t2, 1, 2)), t_flip(f.eval(t2), 1, 2)), t2);
          break;
        } catch (const Error& e) {
          if (e.code() != Errc::DomainError) throw;
          if (attempt == 9) throw Error(Errc::SamplingFailed, "axioms: " + tag + " has no valid towers");
        }
      }
    }
    for (auto& t : nat) r.items.push_back(t.item);
  }
  return r;
}

}  // namespace tconn
