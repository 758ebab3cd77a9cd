#pragma once

#include <vector>

#include "persist/vec.hpp"

namespace persist {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  Vec x;
};

// Dense two-phase simplex: maximise c.x subject to A x <= b, x >= 0 (Bland's rule on ties).
LpResult simplex_max(const std::vector<Vec>& A, const Vec& b, const Vec& c);

// Same problem with free variables (split into positive and negative parts internally).
LpResult maximize_free(const std::vector<Vec>& A, const Vec& b, const Vec& c);

}  // namespace persist
