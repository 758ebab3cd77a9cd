#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "persist/vec.hpp"

namespace persist {

struct Halfspace {
  Vec a;
  double b = 0.0;  // member iff <a, x> + b <= 0
};

class ConvexBody {
 public:
  enum class Kind { polytope, ball };

  // Factories validate: bounded, 0 outside the closure, non-empty interior.
  static ConvexBody polytope(std::vector<Halfspace> halfspaces);
  static ConvexBody box(const Vec& lo, const Vec& hi);
  static ConvexBody interval(double a, double b);
  static ConvexBody ball(const Vec& center, double radius);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }
  const Vec& box_lo() const { return box_lo_; }
  const Vec& box_hi() const { return box_hi_; }
  bool axis_aligned_box() const { return axis_box_; }

  double h(std::span<const double> x) const;
  // Point of maximal depth: Chebyshev centre of a polytope, centre of a ball.
  const Vec& deepest_point() const { return deepest_; }
  double depth() const { return depth_; }

  // {H <= delta}; no validation (the relaxed set may reach the origin).
  ConvexBody relaxed(double delta) const;
  // s o A, s > 0.
  ConvexBody scaled(double s) const;

  double support(std::span<const double> c) const;
  Vec project(std::span<const double> x) const;

 private:
  ConvexBody() = default;
  void finish(bool validate);

  Kind kind_ = Kind::polytope;
  int dim_ = 0;
  std::vector<Halfspace> halfspaces_;
  Vec center_;
  double radius_ = 0.0;
  Vec box_lo_, box_hi_;
  bool axis_box_ = false;
  Vec deepest_;
  double depth_ = 0.0;
};

double h_value(const ConvexBody& body, std::span<const double> x);

struct RadialSlice {
  Vec direction;
  double lower = 0.0;
  double upper = 0.0;
};

std::optional<RadialSlice> radial_bounds(const ConvexBody& body, std::span<const double> phi, double tol = 1e-12);

struct RStarResult {
  double r = 1.0;
  Vec witness;
  Vec phi;
};

// Largest r with {H <= delta} and r^{-1}{H <= delta} intersecting, to absolute tolerance tol.
RStarResult r_star(const ConvexBody& body, double delta = 0.0, double tol = 1e-8);

double persistence_exponent(double r_star, double alpha);

struct IntervalTail {
  double a = 1.0, b = 2.0, alpha = 2.0;
};
double nonstandard_exponent(const std::vector<IntervalTail>& intervals);

std::pair<double, double> projection_interval(const ConvexBody& body, std::span<const double> c);

struct ProjectionBound {
  double exponent = 0.0;
  double ratio = 0.0;  // b(c)/a(c) at the maximiser
  Vec direction;
};

ProjectionBound projection_exponent_bound(const ConvexBody& body, double alpha, int grid_density = 720);

struct ExponentReport {
  double r_star = 1.0;
  Vec phi_star;
  double exponent = 0.0;
  std::vector<std::pair<double, double>> delta_curve;
};

ExponentReport exponent_report(const ConvexBody& body, double alpha, const std::vector<double>& deltas,
                               double tol = 1e-8);

// dist(s1 o A, s2 o A) by alternating projections.
double scaled_distance(const ConvexBody& body, double s1, double s2, double tol = 1e-12);

// 2-D only: grid directions whose ratio U/L is within tol of `r`.
std::vector<Vec> near_optimal_directions(const ConvexBody& body, double r, double tol, int grid_density = 3600);

}  // namespace persist
