#include "tconn/report.hpp"

#include <cmath>

#include "tconn/error.hpp"

namespace tconn {

bool Report::item_pass(const ReportItem& it) const {
  if (!it.evaluable) return true;
  return it.max_residual <= it.threshold.value_or(tol);
}

bool Report::pass() const {
  for (const auto& it : items)
    if (!item_pass(it)) return false;
  return true;
}

const ReportItem& Report::item(const std::string& equation) const {
  for (const auto& it : items)
    if (it.equation == equation) return it;
  throw Error(Errc::UnknownIdentifier, "report has no item " + equation);
}

void Report::append(const Report& other, const std::string& prefix) {
  for (auto it : other.items) {
    it.equation = prefix + it.equation;
    if (!it.threshold && other.tol != tol) it.threshold = other.tol;
    items.push_back(std::move(it));
  }
}

const std::vector<std::vector<double>>& Sampler::points(const SpacePtr& s) {
  auto it = cache_.find(s.get());
  if (it != cache_.end()) return it->second.second;
  std::vector<std::vector<double>> pts;
  for (auto& p : sample(s, 0, cfg_.seed, cfg_.count, cfg_.point_tol)) pts.push_back(std::move(p.coords));
  return cache_.emplace(s.get(), std::make_pair(s, std::move(pts))).first->second.second;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(Errc::DimensionMismatch, "comparing vectors of different length");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = std::abs(a[i] - b[i]);
    if (!(d <= m)) m = std::isnan(d) ? INFINITY : d;
  }
  return m;
}

ReportItem equation_item(std::string name, const SmoothMap& f, const SmoothMap& g,
                         const std::vector<std::vector<double>>& points) {
  if (f.in_dim() != g.in_dim() || f.out_dim() != g.out_dim())
    throw Error(Errc::DimensionMismatch, name + ": sides have different types (" +
                                             std::to_string(f.in_dim()) + "->" + std::to_string(f.out_dim()) +
                                             " vs " + std::to_string(g.in_dim()) + "->" +
                                             std::to_string(g.out_dim()) + ")");
  ReportItem it;
  it.equation = std::move(name);
  for (const auto& x : points) {
    double r;
    try {
      r = max_abs_diff(f(x), g(x));
    } catch (const Error& e) {
      if (e.code() != Errc::DomainError) throw;
      r = INFINITY;
    }
    if (it.worst_point.empty() || r > it.max_residual) {
      it.max_residual = r;
      it.worst_point = x;
    }
  }
  return it;
}

ReportItem magnitude_item(std::string name, const SmoothMap& f, const std::vector<std::vector<double>>& points) {
  ReportItem it;
  it.equation = std::move(name);
  for (const auto& x : points) {
    double r = 0.0;
    for (double v : f(x)) r = std::max(r, std::isnan(v) ? INFINITY : std::abs(v));
    if (it.worst_point.empty() || r > it.max_residual) {
      it.max_residual = r;
      it.worst_point = x;
    }
  }
  return it;
}

}  // namespace tconn
