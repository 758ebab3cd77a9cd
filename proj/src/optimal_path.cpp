#include "persist/optimal_path.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "persist/error.hpp"

namespace persist {

double OptimalPathSkeleton::height(long k) const {
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), k);
  return plateau_heights[static_cast<std::size_t>(it - jump_times.begin())];
}

OptimalPathSkeleton build_skeleton(double a, double b, long c1, long n) {
  if (!(a > 0.0)) throw ConfigError("optimal path needs a > 0");
  if (!(b > a)) throw ConfigError("optimal path needs b > a (b/a = 1 is degenerate)");
  if (c1 < 1) throw ConfigError("optimal path needs c1 >= 1");
  if (n <= c1) throw ConfigError("optimal path needs n > c1");
  if (static_cast<double>(n) > std::ldexp(1.0, 62) / b) throw ConfigError("horizon exceeds 2^62 / b");
  OptimalPathSkeleton s;
  s.a = a;
  s.b = b;
  s.c1 = c1;
  s.n = n;
  double h = b * static_cast<double>(c1);
  s.plateau_heights.push_back(h);
  for (;;) {
    const long plateau_end = static_cast<long>(std::floor(h / a));
    const long t = plateau_end + 1;
    if (t > n) break;
    const double next = b * static_cast<double>(t);
    s.jump_times.push_back(t);
    s.jump_sizes.push_back(next - h);
    s.plateau_heights.push_back(next);
    h = next;
  }
  s.k_n = static_cast<long>(s.jump_times.size());
  return s;
}

std::vector<std::pair<long, double>> skeleton_as_measure(const OptimalPathSkeleton& skel) {
  std::vector<std::pair<long, double>> out;
  for (std::size_t i = 0; i < skel.jump_times.size(); ++i) out.emplace_back(skel.jump_times[i], skel.jump_sizes[i]);
  return out;
}

double cost_heuristic(const OptimalPathSkeleton& skel, double alpha) {
  if (!(alpha > 1.0)) throw ConfigError("cost heuristic needs alpha > 1");
  double cost = 0.0;
  for (long i = 1; i <= skel.k_n; ++i) cost += (1.0 - alpha) * static_cast<double>(i) * std::log(skel.b / skel.a);
  return cost;
}

bool envelope_holds(const OptimalPathSkeleton& skel, long k) {
  if (k < skel.c1 || k > skel.n) return true;
  const double h = skel.height(k);
  const double kd = static_cast<double>(k);
  return skel.a * kd <= h && h <= skel.b * kd;
}

namespace {

std::vector<long> log_grid(long lo, long hi, int per_decade) {
  std::set<long> ks;
  const double step = std::pow(10.0, 1.0 / per_decade);
  for (double x = static_cast<double>(std::max(1L, lo)); x <= static_cast<double>(hi); x *= step)
    ks.insert(static_cast<long>(x));
  ks.insert(hi);
  return {ks.begin(), ks.end()};
}

}  // namespace

long envelope_violations(const OptimalPathSkeleton& skel, long dense_limit, int per_decade) {
  long bad = 0;
  const long dense_end = std::min(dense_limit, skel.n);
  for (long k = skel.c1; k <= dense_end; ++k)
    if (!envelope_holds(skel, k)) ++bad;
  for (long k : log_grid(dense_end, skel.n, per_decade))
    if (!envelope_holds(skel, k)) ++bad;
  // The envelope is tightest just before and at each jump.
  for (long t : skel.jump_times) {
    if (!envelope_holds(skel, t - 1)) ++bad;
    if (!envelope_holds(skel, t)) ++bad;
  }
  return bad;
}

std::vector<std::pair<long, double>> skeleton_curve(const OptimalPathSkeleton& skel, int per_decade) {
  std::set<long> ks;
  for (long k : log_grid(skel.c1, skel.n, per_decade)) ks.insert(k);
  ks.insert(skel.c1);
  for (long t : skel.jump_times) {
    ks.insert(t - 1);
    ks.insert(t);
  }
  std::vector<std::pair<long, double>> out;
  for (long k : ks)
    if (k >= skel.c1 && k <= skel.n) out.emplace_back(k, skel.height(k));
  return out;
}

}  // namespace persist
