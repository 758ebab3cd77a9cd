#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "persist/convex.hpp"
#include "persist/sampler.hpp"

namespace persist {

// Axis-aligned box in an orthonormal frame; axis 0 is the cone direction.
struct Hypercuboid {
  std::vector<Vec> frame;
  std::vector<std::pair<double, double>> intervals;

  bool contains(std::span<const double> x, double tol = 0.0) const;
  std::vector<Vec> vertices() const;
};

struct InnerCuboid {
  Hypercuboid box;
  double r_epsilon = 1.0;
  double epsilon = 0.0;
  double kappa = 0.0;  // cross-section half-width as a fraction of L tan(theta)
};

// Cuboid aligned with phi_star inside (cone of half-angle 2 asin(eps/2)) intersected with A.
InnerCuboid build_inner_cuboid(const ConvexBody& body, const Vec& phi_star, double epsilon, double kappa = 0.5);

struct SegmentParams {
  double epsilon = 0.1;
  double rho = 0.05;
  double delta = 0.1;
  double alpha0 = 1.5;
  long C1 = 4;
  double r_eps = 2.0;
  double g = 0.0;
  double exponent() const { return 1.0 / alpha0 + delta; }
};

double default_alpha0(double alpha);
SegmentParams make_segment_params(double epsilon, double rho, double delta, double alpha0, long C1, double r_eps);

long double m_value(const SegmentParams& p, int i);

struct Span {
  long double lo = 0.0L, hi = 0.0L;
  bool ordered() const { return lo <= hi; }
};

using FrameBox = std::vector<Span>;  // one span per frame axis

struct SegmentSets {
  int i = 0;
  long double m_prev = 0, m = 0, m_next = 0;
  long double window = 0;  // m_i^{1/alpha0 + delta}
  FrameBox square, tilde_square, hat_square, triangle, star, tilde_triangle, tilde_star;
  bool ordered() const;
};

// Endpoints computed verbatim except the lower e1 end of the jump box (see README, "Segment sets").
SegmentSets segment_sets_unchecked(int i, const SegmentParams& p, const InnerCuboid& cub);
// Throws DomainError naming the smallest valid index when endpoints are inverted.
SegmentSets build_segment_sets(int i, const SegmentParams& p, const InnerCuboid& cub);
int segment_threshold(const SegmentParams& p, const InnerCuboid& cub, int i_max = 400);

// Exact intersection of the scalings j o box for j in [j1, j2].
FrameBox scaled_intersection(const InnerCuboid& cub, long double j1, long double j2);
// Brute-force version over every integer scaling (small ranges only).
FrameBox scaled_intersection_bruteforce(const InnerCuboid& cub, long j1, long j2);

// min over axes of the slack of inner inside outer (negative when not contained).
long double inclusion_margin(const FrameBox& inner, const FrameBox& outer);

struct InclusionRow {
  int i = 0;
  bool ordered = false;
  double square_margin = 0;      // square_i inside m_i o box
  double tilde_margin = 0;       // tilde square inside scalings m_i+1 .. floor(g m_i)
  double hat_margin = 0;         // hat square inside scalings floor(g m_i)+1 .. m_{i+1}-1
  double jump_box_margin = 0;    // m_i o tilde star inside star (reported, not part of the lemma)
  bool pass = false;             // ordered and the three lemma inclusions hold
};

struct InclusionReport {
  std::vector<InclusionRow> rows;
  int first_pass = -1;
  bool monotone = true;  // no failure after the first pass
};

InclusionReport check_lemma_inclusions(int i_first, int i_last, const SegmentParams& p, const InnerCuboid& cub);

struct DistanceRow {
  int i = 0;
  long u = 0, u_next = 0;
  double dist = 0, ratio = 0, exact = -1;  // exact closed form when available, else -1
};

struct DistanceReport {
  std::vector<DistanceRow> rows;
  double infimum = 0;
  double last = 0;
  bool positive = false;
  bool cauchy = false;  // last 10 ratios within 1% of each other
};

// Levels u_1 = c1, u_{i+1} = floor(growth u_i), growth = (1 + eta) r.
DistanceReport check_distance_claim(const ConvexBody& body, double growth, long c1, int i_first, int i_last);

struct FluctuationResult {
  double probability = 0, se = 0, window = 0;
  long steps = 0;
};

FluctuationResult check_fluctuation(const Sampler& sampler, const std::vector<Vec>& frame, double m, long steps,
                                    double window_exponent, std::size_t reps, std::uint64_t seed, int workers = 1);

double truncated_second_moment(const RVModel& model, double x);

struct KolmogorovResult {
  double lhs = 0, lhs_se = 0, shape = 0, constant = 0;
};

KolmogorovResult check_kolmogorov(const Sampler& sampler, long m, double x, std::size_t reps, std::uint64_t seed,
                                  int workers = 1);
double kolmogorov_shape(const RVModel& model, long m, double x);
double loglog_slope(double (*f)(const RVModel&, double), const RVModel& model, double x1, double x2);

struct DirectedRvResult {
  double hill_alpha = 0;
  std::vector<double> thresholds, constants, constant_se;
  bool positive = false;
};

DirectedRvResult check_directed_rv(const Sampler& sampler, const Vec& u, std::size_t samples, std::size_t k,
                                   std::uint64_t seed);

struct HlmsRow {
  long n = 0;
  double ratio = 0, se = 0;
};

// B = {|x| > c}; mu(B) = c^{-alpha} under the normalisation mu({|x| > 1}) = 1.
std::vector<HlmsRow> check_hlms_ratio(const Sampler& sampler, double c, const std::vector<long>& n_grid,
                                      std::size_t reps, std::uint64_t seed, int workers = 1);

struct ProjectionAudit {
  double p_full = 0, se_full = 0, p_projected = 0, se_projected = 0;
  bool inequality = false;
  Vec direction;
  double interval_lo = 0, interval_hi = 0;
  double bound_exponent = 0, phi = 0, gap = 0;
};

// Both sides by fixed-effort splitting over the same checkpoints: the projected walk <c, S_k>/k in
// [a(c), b(c)], and S_k/k in A. `effort` particles per stage, `macro` independent replications.
ProjectionAudit projection_bound_audit(const ConvexBody& body, const Sampler& sampler, long n, std::size_t effort,
                                       std::uint64_t seed, int workers = 1, int macro = 10);

struct CheckRow {
  std::string check, parameters;
  double statistic = 0, threshold = 0;
  bool pass = false;
  double margin = 0;
};

}  // namespace persist
