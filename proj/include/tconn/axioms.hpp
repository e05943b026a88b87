#pragma once

#include <cstdint>
#include <vector>

#include "tconn/report.hpp"

namespace tconn {

// Tangent-structure identities on seeded random towers, plus naturality of p, 0, +, l and c
// against each map. Residuals are relative: max|a - b| / max(1, max|a|).
Report tangent_axioms(const std::vector<SmoothMap>& maps, std::uint64_t seed = 42, int towers = 64,
                      double tol = 1e-12);

}  // namespace tconn
