#pragma once

#include <utility>
#include <vector>

namespace persist {

// Plateau-and-jump trajectory inside the cone {a k <= S_k <= b k}: the path holds its height h until
// floor(h/a), then jumps to the upper envelope b (floor(h/a) + 1).
struct OptimalPathSkeleton {
  double a = 1.0, b = 2.0;
  long c1 = 1;
  long n = 0;
  std::vector<long> jump_times;
  std::vector<double> jump_sizes;
  std::vector<double> plateau_heights;  // [0] = b c1, [i] = height after jump i
  long k_n = 0;

  double height(long k) const;
};

OptimalPathSkeleton build_skeleton(double a, double b, long c1, long n);

std::vector<std::pair<long, double>> skeleton_as_measure(const OptimalPathSkeleton& skel);

double cost_heuristic(const OptimalPathSkeleton& skel, double alpha);

// a k <= height(k) <= b k for k in [c1, n].
bool envelope_holds(const OptimalPathSkeleton& skel, long k);

// All k <= dense_limit plus a log-spaced grid up to n; returns the number of violations.
long envelope_violations(const OptimalPathSkeleton& skel, long dense_limit, int per_decade = 200);

// (k, height) rows on a log-sampled grid, always including every jump time and its predecessor.
std::vector<std::pair<long, double>> skeleton_curve(const OptimalPathSkeleton& skel, int per_decade = 50);

}  // namespace persist
