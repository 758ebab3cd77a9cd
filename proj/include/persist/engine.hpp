#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "persist/convex.hpp"
#include "persist/kernels.hpp"
#include "persist/rng.hpp"
#include "persist/sampler.hpp"

namespace persist {

// Kernel-ready view of a body: tests S_k against k o A without dividing.
class Membership {
 public:
  explicit Membership(const ConvexBody& body);
  void inside(const double* const* s, std::size_t count, double k, std::uint8_t* out) const;
  bool inside(std::span<const double> s, double k) const;
  int dim() const { return d_; }

 private:
  bool ball_ = false;
  int d_ = 0;
  std::vector<double> a_, b_, c_;
  double rho_ = 0.0;
};

struct WalkOutcome {
  bool alive = true;
  std::optional<long> exit_time;
  long k = 0;
  Vec s;
};

WalkOutcome simulate_survival(const Sampler& sampler, const ConvexBody& body, long n, Rng& rng);

struct DirectPoint {
  long n = 0;
  double p = 0.0;
  double se = 0.0;
  std::size_t survivors = 0;
  bool estimable = false;
};

std::vector<DirectPoint> direct_mc(const Sampler& sampler, const ConvexBody& body, std::vector<long> n_grid,
                                   std::size_t reps, std::uint64_t seed, int workers = 1);

enum class ScheduleKind { upper_u, lower_m };

struct ScheduleParams {
  long c1 = 3;
  double eta = 0.1;   // upper_u
  double rho = 0.05;  // lower_m
};

struct LevelSchedule {
  ScheduleKind kind = ScheduleKind::upper_u;
  long c1 = 0;
  double eta = 0.0;
  double rho = 0.0;
  double r_ref = 0.0;
  std::vector<long> levels;
  // 1-based index: lambda_n (largest level <= n) for upper_u, kappa_n (first level >= n) for lower_m.
  std::size_t cutoff = 0;
};

// m_i = floor(c1 q^{i-1}), q = (1 - rho) r, evaluated exactly with rho and r read as their shortest decimals.
long double lower_level(long c1, double rho, double r_ref, int i);

LevelSchedule make_schedule(ScheduleKind kind, double r_ref, const ScheduleParams& params, long n);

struct SplittingOptions {
  std::size_t effort = 10000;
  int macro_replications = 10;
  int workers = 1;
  std::uint64_t seed = 1;
  long k_start = 1;  // membership enforced for k >= k_start
};

struct SplittingResult {
  long n = 0;
  LevelSchedule levels;
  std::vector<long> checkpoints;
  std::vector<double> per_level_fraction;      // pooled over macro-replications
  std::vector<std::size_t> survivors;          // pooled survivor counts
  std::vector<double> log_estimate_at;         // log of the running product at each checkpoint
  std::vector<double> std_error_log_at;
  double estimate = 0.0;
  double log_estimate = 0.0;
  double std_error_log = 0.0;
  std::size_t effort = 0;
  std::uint64_t seed = 0;
  bool extinct = false;
  int extinct_level = -1;  // first checkpoint index with no pooled survivors
  std::vector<double> macro_log_estimates;
};

// Fixed-effort multilevel splitting. Checkpoints are the schedule levels below n, any extra times
// (merged and deduplicated) and n itself.
SplittingResult splitting_estimate(const Sampler& sampler, const ConvexBody& body, const LevelSchedule& schedule,
                                   long n, const SplittingOptions& options, const std::vector<long>& extra = {});

// Runs the checkpoint list exactly as given (strictly increasing, last = horizon).
SplittingResult splitting_checkpoints(const Sampler& sampler, const ConvexBody& body, std::vector<long> checkpoints,
                                      const SplittingOptions& options);

struct ExponentFit {
  std::vector<std::pair<double, double>> points;  // (n, log P)
  double slope = 0.0;     // coefficient of (log n)^2
  double slope_se = 0.0;
  double linear = 0.0;    // coefficient of log n
  double intercept = 0.0;
  double r2 = 0.0;
};

ExponentFit exponent_fit(const std::vector<std::pair<double, double>>& points);

struct WindowedResult {
  double estimate = 0.0;
  double log_estimate = 0.0;
  double std_error_log = 0.0;
  double reference_exponent = 0.0;  // P is of order n^{-reference_exponent}
  long k_start = 0;
};

double windowed_reference_exponent(double a, double b, double epsilon, double alpha);

WindowedResult windowed_persistence(const Sampler& sampler, double a, double b, double epsilon, long n,
                                    const SplittingOptions& options, double eta = 0.1);

}  // namespace persist
