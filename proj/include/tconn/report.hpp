#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tconn/smooth_map.hpp"
#include "tconn/space.hpp"

namespace tconn {

struct ReportItem {
  std::string equation;
  double max_residual = 0.0;
  std::vector<double> worst_point;
  // Pass threshold; unset means the report tolerance.
  std::optional<double> threshold;
  // False for identities that cannot be evaluated as printed.
  bool evaluable = true;
  std::string note;
};

struct Report {
  std::string command;
  std::string subject;
  double tol = 1e-8;
  std::vector<ReportItem> items;

  bool item_pass(const ReportItem& it) const;
  bool pass() const;
  const ReportItem& item(const std::string& equation) const;
  double residual(const std::string& equation) const { return item(equation).max_residual; }
  void append(const Report& other, const std::string& prefix = {});
};

struct Sampling {
  int count = 64;
  std::uint64_t seed = 42;
  double point_tol = 1e-9;
};

// Caches depth-0 sample points per space for the lifetime of a check run.
class Sampler {
 public:
  explicit Sampler(Sampling cfg = {}) : cfg_(cfg) {}
  const std::vector<std::vector<double>>& points(const SpacePtr& s);
  const Sampling& config() const { return cfg_; }

 private:
  Sampling cfg_;
  std::map<const Space*, std::pair<SpacePtr, std::vector<std::vector<double>>>> cache_;
};

// max over points of max|f(x) - g(x)|.
ReportItem equation_item(std::string name, const SmoothMap& f, const SmoothMap& g,
                         const std::vector<std::vector<double>>& points);
// max over points of max|f(x)|.
ReportItem magnitude_item(std::string name, const SmoothMap& f, const std::vector<std::vector<double>>& points);

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace tconn
