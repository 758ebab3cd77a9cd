#include "persist/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "persist/error.hpp"
#include "persist/lp.hpp"

namespace persist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec unit(int d, int j, double sign = 1.0) {
  Vec e(static_cast<std::size_t>(d), 0.0);
  e[static_cast<std::size_t>(j)] = sign;
  return e;
}

void check_unit(std::span<const double> v, const char* what) {
  if (std::abs(norm(v) - 1.0) > 1e-12) throw ConfigError(std::string(what) + " must be a unit vector");
}

struct Cut {
  Vec slope;
  double offset;  // g(y) >= slope . y + offset
};

struct KelleyOutcome {
  bool feasible = false;
  Vec y;
};

// Cutting-plane minimisation of a convex function over a box, stopped as soon as the sign of
// min g - level is decided.
template <class F>
KelleyOutcome kelley_feasible(F&& g, const Vec& lo, const Vec& hi, const Vec& start, double level) {
  const std::size_t d = lo.size();
  std::vector<Cut> cuts;
  Vec y = start, best_y = start;
  double upper = kInf;
  for (int iter = 0; iter < 4000; ++iter) {
    Vec grad;
    const double val = g(y, grad);
    if (val < upper) {
      upper = val;
      best_y = y;
    }
    if (upper <= level + 1e-12) return {true, best_y};
    cuts.push_back({grad, val - dot(grad, y)});

    std::vector<Vec> A;
    Vec b;
    for (const auto& c : cuts) {
      Vec row = c.slope;
      row.push_back(-1.0);
      A.push_back(std::move(row));
      b.push_back(-c.offset);
    }
    for (std::size_t j = 0; j < d; ++j) {
      Vec up(d + 1, 0.0), down(d + 1, 0.0);
      up[j] = 1.0;
      down[j] = -1.0;
      A.push_back(up);
      b.push_back(hi[j]);
      A.push_back(down);
      b.push_back(-lo[j]);
    }
    Vec obj(d + 1, 0.0);
    obj[d] = -1.0;
    const LpResult lp = maximize_free(A, b, obj);
    if (lp.status != LpStatus::optimal) break;
    const double lower = -lp.value;
    if (lower > level + 1e-12) return {false, best_y};
    if (upper - lower < 1e-13) break;
    y.assign(lp.x.begin(), lp.x.begin() + static_cast<std::ptrdiff_t>(d));
  }
  return {upper <= level + 1e-10, best_y};
}

// min over y of max(H(y), H(r y)); feasibility of the r-candidate at level delta.
KelleyOutcome feasible_at(const ConvexBody& body, double r, double delta) {
  const int d = body.dim();
  if (body.kind() == ConvexBody::Kind::polytope) {
    std::vector<Vec> A;
    Vec b;
    for (const auto& hs : body.halfspaces()) {
      Vec row = hs.a;
      row.push_back(-1.0);
      A.push_back(row);
      b.push_back(-hs.b);
      Vec row_r = scaled(hs.a, r);
      row_r.push_back(-1.0);
      A.push_back(std::move(row_r));
      b.push_back(-hs.b);
    }
    Vec obj(static_cast<std::size_t>(d) + 1, 0.0);
    obj.back() = -1.0;
    const LpResult lp = maximize_free(A, b, obj);
    if (lp.status != LpStatus::optimal) return {false, {}};
    Vec y(lp.x.begin(), lp.x.begin() + d);
    return {-lp.value <= delta + 1e-12, y};
  }
  const Vec& c = body.center();
  const double rho = body.radius();
  auto g = [&](const Vec& y, Vec& grad) {
    const Vec d1 = sub(y, c);
    const Vec ry = scaled(y, r);
    const Vec d2 = sub(ry, c);
    const double n1 = norm(d1), n2 = norm(d2);
    if (n1 >= n2) {
      grad = n1 > 0 ? scaled(d1, 1.0 / n1) : Vec(d1.size(), 0.0);
      return n1 - rho;
    }
    grad = n2 > 0 ? scaled(d2, r / n2) : Vec(d2.size(), 0.0);
    return n2 - rho;
  };
  const ConvexBody relaxed = body.relaxed(delta);
  // The midpoint between the two centres is a good first cut location.
  Vec start = scaled(c, 0.5 * (1.0 + 1.0 / r));
  for (int j = 0; j < d; ++j)
    start[static_cast<std::size_t>(j)] = std::clamp(start[static_cast<std::size_t>(j)], relaxed.box_lo()[static_cast<std::size_t>(j)],
                                                    relaxed.box_hi()[static_cast<std::size_t>(j)]);
  auto out = kelley_feasible(g, relaxed.box_lo(), relaxed.box_hi(), start, delta);
  return out;
}

}  // namespace

ConvexBody ConvexBody::polytope(std::vector<Halfspace> halfspaces) {
  if (halfspaces.empty()) throw ConfigError("polytope needs at least one half-space");
  ConvexBody body;
  body.kind_ = Kind::polytope;
  body.dim_ = static_cast<int>(halfspaces.front().a.size());
  if (body.dim_ < 1) throw ConfigError("half-space normal must be non-empty");
  for (const auto& hs : halfspaces) {
    if (static_cast<int>(hs.a.size()) != body.dim_) throw ConfigError("half-space normals differ in dimension");
    if (norm(hs.a) == 0.0) throw ConfigError("half-space normal must be non-zero");
  }
  body.halfspaces_ = std::move(halfspaces);
  body.finish(true);
  return body;
}

ConvexBody ConvexBody::box(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size() || lo.empty()) throw ConfigError("box bounds must be non-empty and of equal length");
  std::vector<Halfspace> hs;
  const int d = static_cast<int>(lo.size());
  for (int j = 0; j < d; ++j) {
    if (!(lo[static_cast<std::size_t>(j)] < hi[static_cast<std::size_t>(j)])) throw ConfigError("box requires lo < hi in every coordinate");
    hs.push_back({unit(d, j), -hi[static_cast<std::size_t>(j)]});
    hs.push_back({unit(d, j, -1.0), lo[static_cast<std::size_t>(j)]});
  }
  return polytope(std::move(hs));
}

ConvexBody ConvexBody::interval(double a, double b) { return box({a}, {b}); }

ConvexBody ConvexBody::ball(const Vec& center, double radius) {
  if (center.empty()) throw ConfigError("ball centre must be non-empty");
  if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
  ConvexBody body;
  body.kind_ = Kind::ball;
  body.dim_ = static_cast<int>(center.size());
  body.center_ = center;
  body.radius_ = radius;
  body.finish(true);
  return body;
}

void ConvexBody::finish(bool validate) {
  const std::size_t d = static_cast<std::size_t>(dim_);
  box_lo_.assign(d, 0.0);
  box_hi_.assign(d, 0.0);
  if (kind_ == Kind::ball) {
    for (std::size_t j = 0; j < d; ++j) {
      box_lo_[j] = center_[j] - radius_;
      box_hi_[j] = center_[j] + radius_;
    }
    deepest_ = center_;
    depth_ = radius_;
  } else {
    std::vector<Vec> A;
    Vec b;
    for (const auto& hs : halfspaces_) {
      A.push_back(hs.a);
      b.push_back(-hs.b);
    }
    for (int j = 0; j < dim_; ++j) {
      const LpResult up = maximize_free(A, b, unit(dim_, j));
      if (up.status == LpStatus::infeasible) throw ConfigError("polytope is empty");
      if (up.status == LpStatus::unbounded) throw ConfigError("polytope is unbounded");
      const LpResult down = maximize_free(A, b, unit(dim_, j, -1.0));
      if (down.status != LpStatus::optimal) throw ConfigError("polytope is unbounded");
      box_hi_[static_cast<std::size_t>(j)] = up.value;
      box_lo_[static_cast<std::size_t>(j)] = -down.value;
    }
    // Chebyshev centre: max t with <a_i, x> + |a_i| t <= -b_i.
    std::vector<Vec> C;
    for (const auto& hs : halfspaces_) {
      Vec row = hs.a;
      row.push_back(norm(hs.a));
      C.push_back(std::move(row));
    }
    Vec obj(d + 1, 0.0);
    obj[d] = 1.0;
    const LpResult cheb = maximize_free(C, b, obj);
    if (cheb.status == LpStatus::optimal) {
      deepest_.assign(cheb.x.begin(), cheb.x.begin() + dim_);
      depth_ = cheb.value;
    } else {
      deepest_ = box_lo_;
      depth_ = 0.0;
    }
    axis_box_ = true;
    for (const auto& hs : halfspaces_) {
      int nonzero = 0;
      for (double v : hs.a)
        if (v != 0.0) ++nonzero;
      if (nonzero != 1) axis_box_ = false;
    }
  }
  if (!validate) return;
  if (depth_ <= 1e-12) throw HypothesisError("target set must have non-empty interior");
  const Vec zero(d, 0.0);
  if (!(h(zero) > 0.0)) throw HypothesisError("target set must be bounded away from the origin (0 outside its closure)");
}

double ConvexBody::h(std::span<const double> x) const {
  if (kind_ == Kind::ball) return distance(x, center_) - radius_;
  double m = -kInf;
  for (const auto& hs : halfspaces_) m = std::max(m, dot(hs.a, x) + hs.b);
  return m;
}

ConvexBody ConvexBody::relaxed(double delta) const {
  ConvexBody out = *this;
  if (kind_ == Kind::ball) {
    out.radius_ = radius_ + delta;
  } else {
    for (auto& hs : out.halfspaces_) hs.b -= delta;
  }
  out.finish(false);
  return out;
}

ConvexBody ConvexBody::scaled(double s) const {
  ConvexBody out = *this;
  if (kind_ == Kind::ball) {
    out.center_ = persist::scaled(center_, s);
    out.radius_ = radius_ * s;
    out.box_lo_ = persist::scaled(box_lo_, s);
    out.box_hi_ = persist::scaled(box_hi_, s);
  } else {
    for (auto& hs : out.halfspaces_) hs.b *= s;
    out.box_lo_ = persist::scaled(box_lo_, s);
    out.box_hi_ = persist::scaled(box_hi_, s);
  }
  out.deepest_ = persist::scaled(deepest_, s);
  out.depth_ = depth_ * s;
  return out;
}

double ConvexBody::support(std::span<const double> c) const {
  if (kind_ == Kind::ball) return dot(c, center_) + radius_ * norm(c);
  std::vector<Vec> A;
  Vec b;
  for (const auto& hs : halfspaces_) {
    A.push_back(hs.a);
    b.push_back(-hs.b);
  }
  const LpResult r = maximize_free(A, b, Vec(c.begin(), c.end()));
  if (r.status != LpStatus::optimal) throw DomainError("support function undefined: body is empty or unbounded");
  return r.value;
}

Vec ConvexBody::project(std::span<const double> x) const {
  const std::size_t d = x.size();
  if (kind_ == Kind::ball) {
    const Vec diff = sub(x, center_);
    const double n = norm(diff);
    if (n <= radius_) return Vec(x.begin(), x.end());
    Vec out = center_;
    for (std::size_t j = 0; j < d; ++j) out[j] += diff[j] * radius_ / n;
    return out;
  }
  if (axis_box_) {
    Vec out(x.begin(), x.end());
    for (std::size_t j = 0; j < d; ++j) out[j] = std::clamp(out[j], box_lo_[j], box_hi_[j]);
    return out;
  }
  // Dykstra's algorithm over the half-spaces.
  Vec cur(x.begin(), x.end());
  std::vector<Vec> incr(halfspaces_.size(), Vec(d, 0.0));
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < halfspaces_.size(); ++i) {
      const auto& hs = halfspaces_[i];
      Vec y = cur;
      for (std::size_t j = 0; j < d; ++j) y[j] += incr[i][j];
      const double viol = dot(hs.a, y) + hs.b;
      Vec next = y;
      if (viol > 0.0) {
        const double aa = dot(hs.a, hs.a);
        for (std::size_t j = 0; j < d; ++j) next[j] -= viol * hs.a[j] / aa;
      }
      for (std::size_t j = 0; j < d; ++j) {
        incr[i][j] = y[j] - next[j];
        change = std::max(change, std::abs(next[j] - cur[j]));
      }
      cur = std::move(next);
    }
    if (change < 1e-15 * (1.0 + norm(cur))) break;
  }
  return cur;
}

double h_value(const ConvexBody& body, std::span<const double> x) { return body.h(x); }

std::optional<RadialSlice> radial_bounds(const ConvexBody& body, std::span<const double> phi, double tol) {
  if (!(tol > 0.0)) throw ConfigError("radial_bounds: tolerance must be positive");
  check_unit(phi, "direction");
  double lo = 0.0, hi = kInf;
  if (body.kind() == ConvexBody::Kind::ball) {
    const double pc = dot(phi, body.center());
    const double disc = pc * pc - dot(body.center(), body.center()) + body.radius() * body.radius();
    if (disc < 0.0 || pc <= 0.0) return std::nullopt;
    const double s = std::sqrt(disc);
    lo = std::max(0.0, pc - s);
    hi = pc + s;
  } else {
    for (const auto& hs : body.halfspaces()) {
      const double ap = dot(hs.a, phi);
      if (ap > 0.0) {
        hi = std::min(hi, -hs.b / ap);
      } else if (ap < 0.0) {
        lo = std::max(lo, -hs.b / ap);
      } else if (hs.b > 0.0) {
        return std::nullopt;
      }
    }
  }
  if (!(hi > 0.0) || lo > hi) return std::nullopt;
  return RadialSlice{Vec(phi.begin(), phi.end()), lo, hi};
}

RStarResult r_star(const ConvexBody& body, double delta, double tol) {
  if (!(tol > 0.0)) throw ConfigError("r_star: tolerance must be positive");
  if (delta < 0.0) throw ConfigError("r_star: delta must be non-negative");
  const ConvexBody relaxed = body.relaxed(delta);
  if (relaxed.kind() == ConvexBody::Kind::ball ? relaxed.radius() <= 0.0 : false)
    throw DomainError("relaxed body is empty");
  const Vec zero(static_cast<std::size_t>(body.dim()), 0.0);
  if (!(relaxed.h(zero) > 0.0))
    throw DomainError("relaxed set {H <= delta} reaches the origin; r is unbounded");
  KelleyOutcome base = feasible_at(body, 1.0, delta);
  if (!base.feasible) throw DomainError("relaxed body {H <= delta} is empty");
  double lo = 1.0, hi = 2.0;
  Vec witness = base.y;
  for (;;) {
    auto f = feasible_at(body, hi, delta);
    if (!f.feasible) break;
    lo = hi;
    witness = f.y;
    hi *= 2.0;
    if (hi > 1e15) throw DomainError("r is unbounded for this body");
  }
  while (hi - lo > 0.25 * tol) {
    const double mid = 0.5 * (lo + hi);
    auto f = feasible_at(body, mid, delta);
    if (f.feasible) {
      lo = mid;
      witness = f.y;
    } else {
      hi = mid;
    }
  }
  RStarResult out;
  out.r = lo;
  out.witness = witness;
  out.phi = normalized(witness);
  return out;
}

double persistence_exponent(double r, double alpha) {
  if (!(alpha > 1.0)) throw ConfigError("persistence exponent requires alpha > 1");
  if (!(r > 1.0)) throw DomainError("r* <= 1: degenerate body, exponent would be infinite");
  return (alpha - 1.0) / (2.0 * std::log(r));
}

double nonstandard_exponent(const std::vector<IntervalTail>& intervals) {
  if (intervals.empty()) throw ConfigError("nonstandard exponent needs at least one interval");
  double sum = 0.0;
  for (const auto& it : intervals) {
    if (!(it.a > 0.0 && it.a < it.b)) throw ConfigError("nonstandard exponent requires 0 < a < b");
    if (!(it.alpha > 1.0)) throw ConfigError("nonstandard exponent requires alpha > 1");
    sum += (it.alpha - 1.0) / (std::log(it.b) - std::log(it.a));
  }
  return 0.5 * sum;
}

std::pair<double, double> projection_interval(const ConvexBody& body, std::span<const double> c) {
  if (std::abs(norm(c) - 1.0) > 1e-9) throw ConfigError("projection direction must be a unit vector");
  const Vec neg = scaled(c, -1.0);
  return {-body.support(neg), body.support(c)};
}

ProjectionBound projection_exponent_bound(const ConvexBody& body, double alpha, int grid_density) {
  if (!(alpha > 1.0)) throw ConfigError("projection bound requires alpha > 1");
  if (grid_density < 8) throw ConfigError("grid_density must be at least 8");
  const int d = body.dim();
  auto ratio = [&](const Vec& c) {
    const auto [a, b] = projection_interval(body, c);
    return a > 0.0 ? b / a : kInf;
  };
  double best = kInf;
  Vec best_c;
  auto consider = [&](Vec c) {
    const double q = ratio(c);
    if (q < best) {
      best = q;
      best_c = std::move(c);
    }
  };
  if (d == 1) {
    consider({1.0});
    consider({-1.0});
  } else if (d == 2) {
    const double step = 2.0 * std::numbers::pi / grid_density;
    double best_t = 0.0;
    for (int i = 0; i < grid_density; ++i) {
      const double t = step * i;
      const double before = best;
      consider({std::cos(t), std::sin(t)});
      if (best < before) best_t = t;
    }
    if (best < kInf) {
      // golden-section refinement on the bracketing cell pair
      double lo = best_t - step, hi = best_t + step;
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      auto f = [&](double t) { return ratio({std::cos(t), std::sin(t)}); };
      double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
      double f1 = f(x1), f2 = f(x2);
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        if (f1 <= f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - g * (hi - lo);
          f1 = f(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + g * (hi - lo);
          f2 = f(x2);
        }
      }
      const double t = 0.5 * (lo + hi);
      consider({std::cos(t), std::sin(t)});
    }
  } else {
    // Fibonacci lattice on the sphere, then a shrinking coordinate search.
    const int count = grid_density * grid_density / 4;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      Vec c(static_cast<std::size_t>(d), 0.0);
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double rr = std::sqrt(1.0 - z * z);
      c[0] = rr * std::cos(golden * i);
      c[1] = rr * std::sin(golden * i);
      c[2] = z;
      consider(normalized(c));
    }
    if (best < kInf) {
      for (double h = 0.05; h > 1e-12; h *= 0.5) {
        bool improved = true;
        while (improved) {
          improved = false;
          for (int j = 0; j < d; ++j)
            for (double s : {-1.0, 1.0}) {
              Vec c = best_c;
              c[static_cast<std::size_t>(j)] += s * h;
              const double before = best;
              consider(normalized(c));
              if (best < before) improved = true;
            }
        }
      }
    }
  }
  if (best == kInf) throw DomainError("projection bound undefined: every projection interval touches or crosses 0");
  return {(alpha - 1.0) / (2.0 * std::log(best)), best, best_c};
}

ExponentReport exponent_report(const ConvexBody& body, double alpha, const std::vector<double>& deltas, double tol) {
  ExponentReport rep;
  const RStarResult r = r_star(body, 0.0, tol);
  rep.r_star = r.r;
  rep.phi_star = r.phi;
  rep.exponent = persistence_exponent(r.r, alpha);
  for (double dl : deltas) rep.delta_curve.emplace_back(dl, r_star(body, dl, tol).r);
  return rep;
}

double scaled_distance(const ConvexBody& body, double s1, double s2, double tol) {
  const ConvexBody A = body.scaled(s1), B = body.scaled(s2);
  Vec x = A.project(B.deepest_point());
  Vec y = B.project(x);
  for (int it = 0; it < 200000; ++it) {
    const Vec xn = A.project(y);
    const Vec yn = B.project(xn);
    const double change = std::max(distance(xn, x), distance(yn, y));
    x = xn;
    y = yn;
    if (change < tol) break;
  }
  return distance(x, y);
}

std::vector<Vec> near_optimal_directions(const ConvexBody& body, double r, double tol, int grid_density) {
  if (body.dim() != 2) throw ConfigError("near_optimal_directions supports dimension 2 only");
  std::vector<Vec> out;
  for (int i = 0; i < grid_density; ++i) {
    const double t = 2.0 * std::numbers::pi * i / grid_density;
    const Vec phi = {std::cos(t), std::sin(t)};
    const auto s = radial_bounds(body, phi);
    if (s && s->upper / s->lower >= r - tol) out.push_back(phi);
  }
  return out;
}

}  // namespace persist
