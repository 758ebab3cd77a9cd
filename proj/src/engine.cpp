#include "persist/engine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <charconv>
#include <cmath>
#include <limits>

#include "persist/error.hpp"
#include "persist/parallel.hpp"

namespace persist {

namespace {

constexpr std::size_t kBlock = 256;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Population {
  int d = 0;
  std::size_t count = 0;
  std::vector<std::vector<double>> pos;

  Population(int dim, std::size_t n) : d(dim), count(n), pos(static_cast<std::size_t>(dim), std::vector<double>(n, 0.0)) {}
};

struct StageSpec {
  long k_from = 0;
  long k_to = 0;
  long k_start = 1;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::uint64_t level = 0;
  const std::vector<long>* record = nullptr;  // sorted times in (k_from, k_to]
};

// Walks every particle of `pop` over one stage. Returns per-particle survival and fills
// `counts` with the number alive at each recorded time.
std::vector<std::uint8_t> advance(const Sampler& sampler, const Membership& member, Population& pop,
                                  const StageSpec& st, std::vector<std::size_t>& counts, int workers) {
  const int d = pop.d;
  const std::size_t nblocks = (pop.count + kBlock - 1) / kBlock;
  const std::size_t nrec = st.record->size();
  std::vector<std::vector<std::size_t>> block_counts(nblocks, std::vector<std::size_t>(nrec, 0));
  std::vector<std::uint8_t> alive(pop.count, 0);

  parallel_for(nblocks, workers, [&](std::size_t blk) {
    const std::size_t p0 = blk * kBlock, p1 = std::min(pop.count, p0 + kBlock);
    std::size_t n = p1 - p0;
    std::vector<std::vector<double>> loc(static_cast<std::size_t>(d), std::vector<double>(n));
    std::vector<std::size_t> idx(n);
    std::vector<Rng> rngs;
    rngs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      idx[i] = p0 + i;
      for (int j = 0; j < d; ++j) loc[static_cast<std::size_t>(j)][i] = pop.pos[static_cast<std::size_t>(j)][p0 + i];
      rngs.emplace_back(st.seed, st.replication, stream_id(StreamPurpose::walk, st.level, p0 + i));
    }
    std::vector<const double*> ptrs(static_cast<std::size_t>(d));
    std::vector<std::uint8_t> in(n);
    Vec step(static_cast<std::size_t>(d));
    std::size_t rec = 0;
    for (long k = st.k_from + 1; k <= st.k_to && n > 0; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        sampler.sample(rngs[i], step);
        for (int j = 0; j < d; ++j) loc[static_cast<std::size_t>(j)][i] += step[static_cast<std::size_t>(j)];
      }
      if (k >= st.k_start) {
        for (int j = 0; j < d; ++j) ptrs[static_cast<std::size_t>(j)] = loc[static_cast<std::size_t>(j)].data();
        member.inside(ptrs.data(), n, static_cast<double>(k), in.data());
        std::size_t w = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (!in[i]) continue;
          if (w != i) {
            for (int j = 0; j < d; ++j) loc[static_cast<std::size_t>(j)][w] = loc[static_cast<std::size_t>(j)][i];
            idx[w] = idx[i];
            rngs[w] = rngs[i];
          }
          ++w;
        }
        n = w;
      }
      while (rec < nrec && (*st.record)[rec] == k) block_counts[blk][rec++] = n;
    }
    // Records after extinction of the block stay zero.
    for (std::size_t i = 0; i < n; ++i) {
      alive[idx[i]] = 1;
      for (int j = 0; j < d; ++j) pop.pos[static_cast<std::size_t>(j)][idx[i]] = loc[static_cast<std::size_t>(j)][i];
    }
  });

  counts.assign(nrec, 0);
  for (std::size_t b = 0; b < nblocks; ++b)
    for (std::size_t r = 0; r < nrec; ++r) counts[r] += block_counts[b][r];
  return alive;
}

void check_dims(const Sampler& sampler, const ConvexBody& body) {
  if (sampler.dimension() != body.dim()) throw ConfigError("model and body dimensions differ");
  if (body.dim() > 16) throw ConfigError("walk kernels support dimension <= 16");
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

Membership::Membership(const ConvexBody& body) : d_(body.dim()) {
  if (body.kind() == ConvexBody::Kind::ball) {
    ball_ = true;
    c_ = body.center();
    rho_ = body.radius();
    return;
  }
  for (const auto& hs : body.halfspaces()) {
    a_.insert(a_.end(), hs.a.begin(), hs.a.end());
    b_.push_back(hs.b);
  }
}

void Membership::inside(const double* const* s, std::size_t count, double k, std::uint8_t* out) const {
  if (ball_) {
    kernels::ball_inside({d_, c_.data(), rho_}, s, count, k, out);
  } else {
    kernels::polytope_inside({d_, static_cast<int>(b_.size()), a_.data(), b_.data()}, s, count, k, out);
  }
}

bool Membership::inside(std::span<const double> s, double k) const {
  std::vector<const double*> ptrs(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) ptrs[j] = &s[j];
  std::uint8_t out = 0;
  inside(ptrs.data(), 1, k, &out);
  return out != 0;
}

WalkOutcome simulate_survival(const Sampler& sampler, const ConvexBody& body, long n, Rng& rng) {
  if (n < 1) throw ConfigError("horizon n must be >= 1");
  check_dims(sampler, body);
  const Membership member(body);
  WalkOutcome out;
  out.s.assign(static_cast<std::size_t>(body.dim()), 0.0);
  Vec step(out.s.size());
  for (long k = 1; k <= n; ++k) {
    sampler.sample(rng, step);
    for (std::size_t j = 0; j < step.size(); ++j) out.s[j] += step[j];
    out.k = k;
    if (!member.inside(out.s, static_cast<double>(k))) {
      out.alive = false;
      out.exit_time = k;
      return out;
    }
  }
  return out;
}

std::vector<DirectPoint> direct_mc(const Sampler& sampler, const ConvexBody& body, std::vector<long> n_grid,
                                   std::size_t reps, std::uint64_t seed, int workers) {
  if (reps < 100) throw ConfigError("direct Monte Carlo needs at least 100 replications");
  if (n_grid.empty()) throw ConfigError("n_grid must not be empty");
  std::sort(n_grid.begin(), n_grid.end());
  n_grid.erase(std::unique(n_grid.begin(), n_grid.end()), n_grid.end());
  if (n_grid.front() < 1) throw ConfigError("n_grid entries must be >= 1");
  check_dims(sampler, body);
  const Membership member(body);
  Population pop(body.dim(), reps);
  StageSpec st{0, n_grid.back(), 1, seed, 0, 0, &n_grid};
  std::vector<std::size_t> counts;
  advance(sampler, member, pop, st, counts, workers);
  std::vector<DirectPoint> out;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    DirectPoint pt;
    pt.n = n_grid[i];
    pt.survivors = counts[i];
    pt.p = static_cast<double>(counts[i]) / static_cast<double>(reps);
    pt.se = std::sqrt(pt.p * (1.0 - pt.p) / static_cast<double>(reps));
    pt.estimable = counts[i] > 0;
    out.push_back(pt);
  }
  return out;
}

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

// The shortest decimal that round-trips to v, as an exact rational: 0.05 becomes 1/20, not the binary double.
cpp_rational decimal_rational(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  const std::string text(buf, res.ptr);
  const auto epos = text.find_first_of("eE");
  const std::string mant = text.substr(0, epos);
  int exp10 = epos == std::string::npos ? 0 : std::stoi(text.substr(epos + 1));
  std::string digits;
  for (char c : mant) {
    if (c == '.') exp10 -= static_cast<int>(mant.size() - mant.find('.') - 1);
    else if (c != '-') digits += c;
  }
  cpp_rational r = cpp_rational(cpp_int(digits));
  const cpp_int scale = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(std::abs(exp10)));
  if (exp10 >= 0) r *= scale;
  else r /= scale;
  return v < 0 ? -r : r;
}

}  // namespace

long double lower_level(long c1, double rho, double r_ref, int i) {
  if (i <= 1) return static_cast<long double>(c1);
  const cpp_rational q = (1 - decimal_rational(rho)) * decimal_rational(r_ref);
  const unsigned e = static_cast<unsigned>(i - 1);
  const cpp_int num = c1 * boost::multiprecision::pow(boost::multiprecision::numerator(q), e);
  const cpp_int den = boost::multiprecision::pow(boost::multiprecision::denominator(q), e);
  return static_cast<cpp_int>(num / den).convert_to<long double>();
}

LevelSchedule make_schedule(ScheduleKind kind, double r_ref, const ScheduleParams& params, long n) {
  if (!(r_ref > 1.0)) throw ConfigError("schedule reference ratio must exceed 1");
  if (n < 1) throw ConfigError("horizon n must be >= 1");
  if (params.c1 < 1) throw ConfigError("c1 must be a positive integer");
  LevelSchedule s;
  s.kind = kind;
  s.c1 = params.c1;
  s.r_ref = r_ref;
  if (kind == ScheduleKind::upper_u) {
    if (!(params.eta > 0.0)) throw ConfigError("eta must be positive");
    const double growth = (1.0 + params.eta) * r_ref;
    const double bound = 2.0 + 1.0 / (growth - 1.0);
    if (!(static_cast<double>(params.c1) > bound))
      throw ConfigError("c1 must exceed 2 + 1/((1+eta) r - 1) = " + std::to_string(bound));
    s.eta = params.eta;
    for (long u = params.c1; u <= n;) {
      s.levels.push_back(u);
      long next = static_cast<long>(std::floor(growth * static_cast<double>(u)));
      if (next <= u) next = u + 1;
      u = next;
    }
    s.cutoff = s.levels.size();
    return s;
  }
  if (!(params.rho > 0.0 && (1.0 - params.rho) * (1.0 - params.rho) * r_ref > 1.0))
    throw ConfigError("rho must satisfy 0 < rho and (1 - rho)^2 r > 1");
  s.rho = params.rho;
  for (int i = 1;; ++i) {
    const long double mi = lower_level(params.c1, params.rho, r_ref, i);
    if (mi > static_cast<long double>(std::numeric_limits<long>::max())) throw ConfigError("m-schedule overflows before reaching n");
    s.levels.push_back(static_cast<long>(mi));
    if (mi >= static_cast<long double>(n)) break;
  }
  s.cutoff = s.levels.size();
  return s;
}

SplittingResult splitting_checkpoints(const Sampler& sampler, const ConvexBody& body, std::vector<long> checkpoints,
                                      const SplittingOptions& opt) {
  if (opt.effort < 100) throw ConfigError("splitting effort must be at least 100");
  if (opt.macro_replications < 1) throw ConfigError("macro_replications must be >= 1");
  if (checkpoints.empty()) throw ConfigError("splitting needs at least one checkpoint");
  for (std::size_t i = 0; i < checkpoints.size(); ++i)
    if (checkpoints[i] < 1 || (i > 0 && checkpoints[i] <= checkpoints[i - 1]))
      throw ConfigError("checkpoints must be strictly increasing positive times");
  check_dims(sampler, body);
  const Membership member(body);
  const std::size_t L = checkpoints.size();
  const int M = opt.macro_replications;
  std::vector<std::vector<std::size_t>> alive_counts(static_cast<std::size_t>(M), std::vector<std::size_t>(L, 0));
  std::vector<std::vector<bool>> active(static_cast<std::size_t>(M), std::vector<bool>(L, false));

  for (int m = 0; m < M; ++m) {
    Population pop(body.dim(), opt.effort);
    long k_prev = 0;
    for (std::size_t l = 0; l < L; ++l) {
      active[static_cast<std::size_t>(m)][l] = true;
      const std::vector<long> rec = {checkpoints[l]};
      StageSpec st{k_prev, checkpoints[l], opt.k_start, opt.seed, static_cast<std::uint64_t>(m), l, &rec};
      std::vector<std::size_t> counts;
      const auto alive = advance(sampler, member, pop, st, counts, opt.workers);
      const std::size_t A = counts[0];
      alive_counts[static_cast<std::size_t>(m)][l] = A;
      k_prev = checkpoints[l];
      if (A == 0) break;
      if (l + 1 == L) break;
      std::vector<std::size_t> surv;
      surv.reserve(A);
      for (std::size_t p = 0; p < alive.size(); ++p)
        if (alive[p]) surv.push_back(p);
      Rng rr(opt.seed, static_cast<std::uint64_t>(m), stream_id(StreamPurpose::resample, l));
      Population next(body.dim(), opt.effort);
      for (std::size_t p = 0; p < opt.effort; ++p) {
        auto pick = static_cast<std::size_t>(rr.uniform() * static_cast<double>(A));
        if (pick >= A) pick = A - 1;
        for (int j = 0; j < body.dim(); ++j)
          next.pos[static_cast<std::size_t>(j)][p] = pop.pos[static_cast<std::size_t>(j)][surv[pick]];
      }
      pop = std::move(next);
    }
  }

  SplittingResult res;
  res.n = checkpoints.back();
  res.checkpoints = checkpoints;
  res.effort = opt.effort;
  res.seed = opt.seed;
  std::vector<double> macro_log(static_cast<std::size_t>(M), 0.0);
  double running = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    std::size_t num = 0, den = 0;
    for (int m = 0; m < M; ++m) {
      if (!active[static_cast<std::size_t>(m)][l]) continue;
      num += alive_counts[static_cast<std::size_t>(m)][l];
      den += opt.effort;
    }
    const double frac = den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
    res.per_level_fraction.push_back(frac);
    res.survivors.push_back(num);
    if (num == 0 && !res.extinct) {
      res.extinct = true;
      res.extinct_level = static_cast<int>(l);
    }
    running = frac > 0.0 ? running + std::log(frac) : kNegInf;
    res.log_estimate_at.push_back(running);
    bool all_finite = true;
    for (int m = 0; m < M; ++m) {
      auto& ml = macro_log[static_cast<std::size_t>(m)];
      const std::size_t A = active[static_cast<std::size_t>(m)][l] ? alive_counts[static_cast<std::size_t>(m)][l] : 0;
      ml = (A > 0 && std::isfinite(ml)) ? ml + std::log(static_cast<double>(A) / static_cast<double>(opt.effort)) : kNegInf;
      if (!std::isfinite(ml)) all_finite = false;
    }
    res.std_error_log_at.push_back(all_finite ? sample_std(macro_log) / std::sqrt(static_cast<double>(M))
                                              : std::numeric_limits<double>::infinity());
  }
  res.macro_log_estimates = macro_log;
  res.log_estimate = res.log_estimate_at.back();
  res.estimate = std::exp(res.log_estimate);
  res.std_error_log = res.std_error_log_at.back();
  return res;
}

SplittingResult splitting_estimate(const Sampler& sampler, const ConvexBody& body, const LevelSchedule& schedule,
                                   long n, const SplittingOptions& options, const std::vector<long>& extra) {
  std::vector<long> cps;
  for (long u : schedule.levels)
    if (u >= 1 && u < n) cps.push_back(u);
  for (long u : extra)
    if (u >= 1 && u < n) cps.push_back(u);
  cps.push_back(n);
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  SplittingResult res = splitting_checkpoints(sampler, body, cps, options);
  res.levels = schedule;
  return res;
}

ExponentFit exponent_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw ConfigError("exponent fit needs at least 4 points");
  const auto N = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd X(N, 3);
  Eigen::VectorXd y(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto& [n, lp] = points[static_cast<std::size_t>(i)];
    if (!std::isfinite(lp)) throw DomainError("exponent fit needs finite log-probabilities");
    if (!(n > 0.0)) throw ConfigError("exponent fit needs positive horizons");
    const double L = std::log(n);
    X(i, 0) = 1.0;
    X(i, 1) = L;
    X(i, 2) = L * L;
    y(i) = lp;
  }
  const auto qr = X.colPivHouseholderQr();
  if (qr.rank() < 3) throw DomainError("exponent fit design matrix is degenerate");
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - X * beta;
  const double rss = resid.squaredNorm();
  const double tss = (y.array() - y.mean()).square().sum();
  ExponentFit fit;
  fit.points = points;
  fit.intercept = beta(0);
  fit.linear = beta(1);
  fit.slope = beta(2);
  const double sigma2 = N > 3 ? rss / static_cast<double>(N - 3) : 0.0;
  const Eigen::MatrixXd cov = (X.transpose() * X).inverse();
  fit.slope_se = std::sqrt(std::max(0.0, sigma2 * cov(2, 2)));
  fit.r2 = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  return fit;
}

double windowed_reference_exponent(double a, double b, double epsilon, double alpha) {
  if (!(a > 0.0 && a < b)) throw ConfigError("windowed persistence needs 0 < a < b");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in (0, 1]");
  if (!(alpha > 1.0)) throw ConfigError("windowed persistence needs alpha > 1");
  const double x = -std::log(epsilon) / std::log(b / a);
  if (std::abs(x - std::round(x)) < 0.05)
    throw ConfigError("-log(epsilon)/log(b/a) = " + std::to_string(x) + " is within 0.05 of an integer");
  return std::ceil(x) * (alpha - 1.0);
}

WindowedResult windowed_persistence(const Sampler& sampler, double a, double b, double epsilon, long n,
                                    const SplittingOptions& options, double eta) {
  if (sampler.model().mode != Mode::one_dimensional) throw ConfigError("windowed persistence needs a 1-D model");
  WindowedResult out;
  out.reference_exponent = windowed_reference_exponent(a, b, epsilon, sampler.model().alpha);
  out.k_start = static_cast<long>(std::ceil(epsilon * static_cast<double>(n)));
  std::vector<long> cps = {out.k_start};
  const double growth = (1.0 + eta) * b / a;
  for (long u = out.k_start;;) {
    long next = static_cast<long>(std::floor(growth * static_cast<double>(u)));
    if (next <= u) next = u + 1;
    if (next >= n) break;
    cps.push_back(next);
    u = next;
  }
  if (cps.back() != n) cps.push_back(n);
  SplittingOptions opt = options;
  opt.k_start = out.k_start;
  const SplittingResult r = splitting_checkpoints(sampler, ConvexBody::interval(a, b), cps, opt);
  if (r.extinct) throw ExtinctionError("windowed estimator lost every particle at checkpoint " + std::to_string(r.extinct_level));
  out.estimate = r.estimate;
  out.log_estimate = r.log_estimate;
  out.std_error_log = r.std_error_log;
  return out;
}

}  // namespace persist
