#include "tconn/tower.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tconn/error.hpp"

namespace tconn {

namespace {

// Opens a zero bit at 0-based position pos.
Mask insert_bit(Mask s, int pos) {
  Mask low = s & ((Mask{1} << pos) - 1);
  Mask high = s >> pos;
  return low | (high << (pos + 1));
}

void check_slot(int slot, int lo, int hi, const char* op) {
  if (slot < lo || slot > hi)
    throw Error(Errc::SlotOutOfRange, std::string(op) + ": slot " + std::to_string(slot) +
                                          " not in [" + std::to_string(lo) + ", " +
                                          std::to_string(hi) + "]");
}

}  // namespace

TangentTower::TangentTower(int depth, std::size_t dim)
    : depth_(depth), dim_(dim), data_((std::size_t{1} << depth) * dim, 0.0) {
  if (depth < 0 || depth > 20) throw Error(Errc::DimensionMismatch, "tower depth out of range");
}

TangentTower TangentTower::point(std::span<const double> x) {
  TangentTower t(0, x.size());
  std::copy(x.begin(), x.end(), t.data_.begin());
  return t;
}

TangentTower TangentTower::unflatten(int depth, std::size_t dim, std::span<const double> flat) {
  TangentTower t(depth, dim);
  if (flat.size() != t.data_.size())
    throw Error(Errc::DimensionMismatch, "flat length " + std::to_string(flat.size()) +
                                             " does not match 2^" + std::to_string(depth) + "*" +
                                             std::to_string(dim));
  const std::size_t n = t.components();
  for (std::size_t p = 0; p < n; ++p) {
    Mask s = static_cast<Mask>(n - 1 - p);
    std::copy_n(flat.begin() + p * dim, dim, t.data_.begin() + s * dim);
  }
  return t;
}

std::vector<double> TangentTower::flatten() const {
  std::vector<double> out(data_.size());
  const std::size_t n = components();
  for (std::size_t p = 0; p < n; ++p) {
    Mask s = static_cast<Mask>(n - 1 - p);
    std::copy_n(data_.begin() + s * dim_, dim_, out.begin() + p * dim_);
  }
  return out;
}

double max_abs_diff(const TangentTower& a, const TangentTower& b) {
  if (a.depth() != b.depth() || a.dim() != b.dim())
    throw Error(Errc::DimensionMismatch, "comparing towers of different shape");
  double m = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i) {
    double d = std::abs(a.raw()[i] - b.raw()[i]);
    if (std::isnan(d)) return d;
    m = std::max(m, d);
  }
  return m;
}

TangentTower t_proj(const TangentTower& t, int slot) {
  check_slot(slot, 1, t.depth(), "t_proj");
  TangentTower out(t.depth() - 1, t.dim());
  for (Mask s = 0; s < out.components(); ++s) {
    auto src = t.component(insert_bit(s, slot - 1));
    std::copy(src.begin(), src.end(), out.component(s).begin());
  }
  return out;
}

TangentTower t_zero(const TangentTower& t, int slot) {
  check_slot(slot, 1, t.depth() + 1, "t_zero");
  TangentTower out(t.depth() + 1, t.dim());
  for (Mask s = 0; s < t.components(); ++s) {
    auto src = t.component(s);
    std::copy(src.begin(), src.end(), out.component(insert_bit(s, slot - 1)).begin());
  }
  return out;
}

TangentTower t_add(const TangentTower& a, const TangentTower& b, int slot) {
  if (a.depth() != b.depth() || a.dim() != b.dim())
    throw Error(Errc::DimensionMismatch, "t_add: towers of different shape");
  check_slot(slot, 1, a.depth(), "t_add");
  const Mask bit = Mask{1} << (slot - 1);
  TangentTower out = a;
  for (Mask s = 0; s < a.components(); ++s) {
    auto ca = a.component(s);
    auto cb = b.component(s);
    if (s & bit) {
      auto co = out.component(s);
      for (std::size_t j = 0; j < a.dim(); ++j) co[j] = ca[j] + cb[j];
    } else if (!std::equal(ca.begin(), ca.end(), cb.begin())) {
      throw Error(Errc::SharedComponentMismatch,
                  "t_add: summands differ on component " + std::to_string(s));
    }
  }
  return out;
}

TangentTower t_neg(const TangentTower& t, int slot) {
  check_slot(slot, 1, t.depth(), "t_neg");
  const Mask bit = Mask{1} << (slot - 1);
  TangentTower out = t;
  for (Mask s = 0; s < t.components(); ++s)
    if (s & bit)
      for (double& v : out.component(s)) v = -v;
  return out;
}

TangentTower t_lift(const TangentTower& t, int slot) {
  check_slot(slot, 1, t.depth(), "t_lift");
  TangentTower out(t.depth() + 1, t.dim());
  const Mask bit = Mask{1} << (slot - 1);
  for (Mask s = 0; s < t.components(); ++s) {
    Mask d = insert_bit(s, slot);
    if (s & bit) d |= Mask{1} << slot;
    auto src = t.component(s);
    std::copy(src.begin(), src.end(), out.component(d).begin());
  }
  return out;
}

TangentTower t_flip(const TangentTower& t, int i, int j) {
  if (i > j) std::swap(i, j);
  check_slot(i, 1, t.depth(), "t_flip");
  check_slot(j, i + 1, t.depth(), "t_flip");
  const Mask bi = Mask{1} << (i - 1), bj = Mask{1} << (j - 1);
  TangentTower out(t.depth(), t.dim());
  for (Mask s = 0; s < t.components(); ++s) {
    Mask d = s & ~(bi | bj);
    if (s & bi) d |= bj;
    if (s & bj) d |= bi;
    auto src = t.component(s);
    std::copy(src.begin(), src.end(), out.component(d).begin());
  }
  return out;
}

TangentTower t_concat(std::span<const TangentTower> parts) {
  if (parts.empty()) return TangentTower(0, 0);
  const int depth = parts[0].depth();
  std::size_t dim = 0;
  for (const auto& p : parts) {
    if (p.depth() != depth) throw Error(Errc::DimensionMismatch, "t_concat: depth mismatch");
    dim += p.dim();
  }
  TangentTower out(depth, dim);
  for (Mask s = 0; s < out.components(); ++s) {
    auto dst = out.component(s).begin();
    for (const auto& p : parts) {
      auto src = p.component(s);
      dst = std::copy(src.begin(), src.end(), dst);
    }
  }
  return out;
}

TangentTower t_slice(const TangentTower& t, std::size_t offset, std::size_t len) {
  if (offset + len > t.dim()) throw Error(Errc::DimensionMismatch, "t_slice out of range");
  TangentTower out(t.depth(), len);
  for (Mask s = 0; s < t.components(); ++s) {
    auto src = t.component(s);
    std::copy_n(src.begin() + offset, len, out.component(s).begin());
  }
  return out;
}

}  // namespace tconn
