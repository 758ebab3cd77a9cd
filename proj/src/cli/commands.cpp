#include "persist/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>

#include "persist/engine.hpp"
#include "persist/error.hpp"
#include "persist/optimal_path.hpp"
#include "persist/parallel.hpp"

namespace persist {

namespace {

const RVModel& need_model(const ExperimentConfig& c, const char* cmd) {
  if (!c.model) throw ConfigError(std::string(cmd) + " needs a model block");
  return *c.model;
}

const ConvexBody& need_body(const ExperimentConfig& c, const char* cmd) {
  if (!c.body) throw ConfigError(std::string(cmd) + " needs a body block");
  return *c.body;
}

template <class T>
const T& need_block(const std::optional<T>& b, const char* name) {
  if (!b) throw ConfigError(std::string("missing '") + name + "' block");
  return *b;
}

RunManifest start(const char* command, const ExperimentConfig& c) {
  RunManifest m;
  m.command = command;
  m.config_digest = hex64(config_digest(c));
  m.version = code_version();
  return m;
}

// Exponent implied by the config: coordinatewise sum for product models, r* formula otherwise.
double theory_exponent(const RVModel& model, const ConvexBody& body) {
  if (model.mode == Mode::nonstandard_product) {
    if (!body.axis_aligned_box()) throw HypothesisError("product models need an axis-aligned box body");
    std::vector<IntervalTail> tails;
    for (int j = 0; j < body.dim(); ++j)
      tails.push_back({body.box_lo()[static_cast<std::size_t>(j)], body.box_hi()[static_cast<std::size_t>(j)],
                       model.components[static_cast<std::size_t>(j)].alpha});
    return nonstandard_exponent(tails);
  }
  return persistence_exponent(r_star(body).r, model.alpha);
}

std::string join(const Vec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
  return s;
}

std::string kv(std::initializer_list<std::pair<const char*, std::string>> items) {
  std::string s;
  for (const auto& [k, v] : items) s += (s.empty() ? "" : ";") + std::string(k) + "=" + v;
  return s;
}

CheckRow row(std::string check, std::string params, double stat, double thr, bool pass, double margin) {
  return {std::move(check), std::move(params), stat, thr, pass, margin};
}

}  // namespace

RunManifest cmd_exponent(const ExperimentConfig& c, const RunContext& ctx) {
  RunManifest man = start("exponent", c);
  const RVModel& model = need_model(c, "exponent");
  const ConvexBody& body = need_body(c, "exponent");
  const ExponentBlock blk = c.exponent.value_or(ExponentBlock{});
  if (model.angular.atomic && ctx.log)
    *ctx.log << "warning: atomic angular law; the absolutely continuous angular hypothesis fails. "
                "Use the one-dimensional or product-coordinate exponent formulas instead.\n";
  const ExponentReport rep = exponent_report(body, model.alpha, blk.deltas, blk.tol);
  std::vector<std::string> header = {"r_star"};
  for (int j = 1; j <= body.dim(); ++j) header.push_back("phi_star_" + std::to_string(j));
  for (const char* h : {"alpha", "exponent", "theory_exponent", "projection_exponent", "projection_gap"})
    header.push_back(h);
  CsvTable t(header);
  std::vector<std::string> r = {fmt(rep.r_star)};
  for (double v : rep.phi_star) r.push_back(fmt(v));
  r.push_back(fmt(model.alpha));
  r.push_back(fmt(rep.exponent));
  r.push_back(fmt(theory_exponent(model, body)));
  double proj = std::nan("");
  if (blk.projection && model.mode != Mode::nonstandard_product)
    proj = projection_exponent_bound(body, model.alpha).exponent;
  r.push_back(fmt(proj));
  r.push_back(fmt(proj - rep.exponent));
  t.add(r);
  write_output(ctx.out, "exponent.csv", t.str(), man);
  CsvTable dc({"delta", "r_delta"});
  for (auto [d, rd] : rep.delta_curve) dc.add({fmt(d), fmt(rd)});
  write_output(ctx.out, "delta_curve.csv", dc.str(), man);
  return man;
}

RunManifest cmd_estimate(const ExperimentConfig& c, const RunContext& ctx) {
  RunManifest man = start("estimate", c);
  const Sampler sampler(centered(need_model(c, "estimate")));
  const ConvexBody& body = need_body(c, "estimate");
  const EstimateBlock& blk = need_block(c.estimate, "estimate");
  std::vector<long> grid = blk.n_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const long n = grid.back();
  const double phi = theory_exponent(sampler.model(), body);
  const double r = r_star(body).r;
  const LevelSchedule sched = make_schedule(blk.schedule, r, blk.schedule_params, n);
  SplittingOptions opt;
  opt.effort = blk.effort;
  opt.macro_replications = blk.macro_replications;
  opt.workers = ctx.workers;
  opt.seed = c.master_seed;
  const SplittingResult res = splitting_estimate(sampler, body, sched, n, opt, grid);

  CsvTable lv({"i", "u_i", "fraction", "survivors"});
  for (std::size_t i = 0; i < res.checkpoints.size(); ++i)
    lv.add({std::to_string(i + 1), std::to_string(res.checkpoints[i]), fmt(res.per_level_fraction[i]),
            std::to_string(res.survivors[i])});
  write_output(ctx.out, "levels.csv", lv.str(), man);

  CsvTable est({"n", "log_p", "se"});
  std::vector<std::pair<double, double>> pts;
  for (long g : grid) {
    const auto it = std::find(res.checkpoints.begin(), res.checkpoints.end(), g);
    const std::size_t k = static_cast<std::size_t>(it - res.checkpoints.begin());
    const double lp = res.log_estimate_at[k];
    est.add({std::to_string(g), fmt(lp), fmt(res.std_error_log_at[k])});
    if (std::isfinite(lp)) pts.emplace_back(static_cast<double>(g), lp);
  }
  write_output(ctx.out, "estimates.csv", est.str(), man);

  CsvTable fit({"slope", "se", "r2", "theory_phi"});
  if (pts.size() >= 4) {
    const ExponentFit f = exponent_fit(pts);
    fit.add({fmt(f.slope), fmt(f.slope_se), fmt(f.r2), fmt(phi)});
  } else {
    fit.add({"nan", "nan", "nan", fmt(phi)});
  }
  write_output(ctx.out, "fit.csv", fit.str(), man);

  if (blk.direct_reps > 0) {
    CsvTable dt({"n", "p", "se", "survivors"});
    for (const DirectPoint& d : direct_mc(sampler, body, grid, blk.direct_reps, c.master_seed, ctx.workers))
      dt.add({std::to_string(d.n), fmt(d.p), fmt(d.se), std::to_string(d.survivors)});
    write_output(ctx.out, "direct.csv", dt.str(), man);
  }
  if (blk.svg) {
    SvgSeries s{"log P_n", {}}, th{"-phi (log n)^2", {}};
    for (auto [x, y] : pts) {
      s.points.emplace_back(std::log(x), y);
      th.points.emplace_back(std::log(x), -phi * std::log(x) * std::log(x));
    }
    write_output(ctx.out, "estimates.svg", svg_line_plot({s, th}, "log n", "log P"), man);
  }
  if (res.extinct) {
    man.status = "extinct";
    throw ExtinctionError("every particle left the body at checkpoint " + std::to_string(res.extinct_level + 1) +
                          "; raise the effort");
  }
  return man;
}

RunManifest cmd_path(const ExperimentConfig& c, const RunContext& ctx) {
  RunManifest man = start("path", c);
  const PathBlock& p = need_block(c.path, "path");
  const OptimalPathSkeleton sk = build_skeleton(p.a, p.b, p.c1, p.n);
  CsvTable curve({"k", "height"});
  for (auto [k, h] : skeleton_curve(sk, p.per_decade)) curve.add({std::to_string(k), fmt(h)});
  write_output(ctx.out, "skeleton.csv", curve.str(), man);
  CsvTable atoms({"T_i", "J_i"});
  for (auto [t, j] : skeleton_as_measure(sk)) atoms.add({std::to_string(t), fmt(j)});
  write_output(ctx.out, "atoms.csv", atoms.str(), man);
  CsvTable sum({"n", "k_n", "k_n_log_ratio_over_log_n", "cost", "cost_over_log_n_sq", "theory"});
  const double ln = std::log(static_cast<double>(p.n)), lr = std::log(p.b / p.a);
  const double cost = cost_heuristic(sk, p.alpha);
  sum.add({std::to_string(p.n), std::to_string(sk.k_n), fmt(static_cast<double>(sk.k_n) * lr / ln), fmt(cost),
           fmt(cost / (ln * ln)), fmt(-(p.alpha - 1.0) / (2.0 * lr))});
  write_output(ctx.out, "path_summary.csv", sum.str(), man);
  return man;
}

const std::vector<std::string>& bench_check_names() {
  static const std::vector<std::string> names = {"inner_cuboid", "inclusions", "distance",    "fluctuation",
                                                 "kolmogorov",   "directed_rv", "hlms",        "projection_audit"};
  return names;
}

std::vector<CheckRow> run_bench_checks(const ExperimentConfig& c, int workers) {
  const BenchBlock& b = need_block(c.bench, "bench");
  for (const auto& name : b.checks)
    if (std::find(bench_check_names().begin(), bench_check_names().end(), name) == bench_check_names().end())
      throw ConfigError("unknown check '" + name + "'");
  std::vector<CheckRow> rows;
  auto wants = [&](const char* n) { return std::find(b.checks.begin(), b.checks.end(), n) != b.checks.end(); };

  std::optional<InnerCuboid> cub;
  std::optional<SegmentParams> sp;
  auto geometry = [&] {
    if (cub) return;
    const ConvexBody& body = need_body(c, "bench");
    const double alpha = need_model(c, "bench").alpha;
    cub = build_inner_cuboid(body, r_star(body).phi, b.epsilon, b.kappa);
    sp = make_segment_params(b.epsilon, b.rho, b.delta, b.alpha0.value_or(default_alpha0(alpha)), b.C1, cub->r_epsilon);
  };

  if (wants("inner_cuboid")) {
    geometry();
    const ConvexBody& body = *c.body;
    Rng rng(c.master_seed, 0, stream_id(StreamPurpose::bench, 8));
    double worst = -std::numeric_limits<double>::infinity();
    const std::size_t d = cub->box.frame.size();
    for (int s = 0; s < 10000; ++s) {
      Vec x(d, 0.0);
      for (std::size_t j = 0; j < d; ++j) {
        const auto [lo, hi] = cub->box.intervals[j];
        const double t = lo + (hi - lo) * rng.uniform();
        for (std::size_t i = 0; i < d; ++i) x[i] += t * cub->box.frame[j][i];
      }
      worst = std::max(worst, body.h(x));
    }
    for (const Vec& v : cub->box.vertices()) worst = std::max(worst, body.h(v));
    const double tol = 1e-9;
    rows.push_back(row("inner_cuboid", kv({{"epsilon", fmt(b.epsilon)}, {"kappa", fmt(cub->kappa)}, {"r_epsilon", fmt(cub->r_epsilon)}}),
                       worst, tol, worst <= tol, tol - worst));
  }
  if (wants("inclusions")) {
    geometry();
    int first_ordered = -1;
    try {
      first_ordered = segment_threshold(*sp, *cub);
    } catch (const DomainError&) {
    }
    const InclusionReport rep = check_lemma_inclusions(b.i_first, b.i_last, *sp, *cub);
    double jump_worst = std::numeric_limits<double>::infinity();
    for (const InclusionRow& r : rep.rows) {
      const double m = std::min({r.square_margin, r.tilde_margin, r.hat_margin});
      const bool below = !r.ordered || (rep.first_pass < 0 || r.i < rep.first_pass);
      rows.push_back(row("lemma_inclusions",
                         kv({{"i", std::to_string(r.i)}, {"ordered", r.ordered ? "1" : "0"},
                             {"below_threshold", below ? "1" : "0"}, {"threshold_i", std::to_string(first_ordered)}}),
                         m, 0.0, r.pass, m));
      if (r.ordered) jump_worst = std::min(jump_worst, r.jump_box_margin);
    }
    rows.push_back(row("inclusions_monotone", kv({{"first_pass", std::to_string(rep.first_pass)}}), rep.monotone ? 1 : 0, 1,
                       rep.monotone && rep.first_pass >= 0, rep.monotone ? 0 : -1));
    rows.push_back(row("jump_box_inclusion", kv({{"i_range", std::to_string(b.i_first) + ".." + std::to_string(b.i_last)}}),
                       jump_worst, 0.0, jump_worst >= 0.0, jump_worst));
  }
  if (wants("distance")) {
    const ConvexBody& body = need_body(c, "bench");
    const double growth = (1.0 + b.growth_eta) * r_star(body).r;
    const DistanceReport rep = check_distance_claim(body, growth, b.distance_c1, b.i_first, b.i_last);
    const std::string p = kv({{"eta", fmt(b.growth_eta)}, {"c1", std::to_string(b.distance_c1)}});
    rows.push_back(row("distance_infimum", p, rep.infimum, 0.0, rep.positive, rep.infimum));
    rows.push_back(row("distance_cauchy", p, rep.last, 0.0, rep.cauchy, rep.cauchy ? 0 : -1));
  }
  if (wants("fluctuation")) {
    const RVModel model = centered(need_model(c, "bench"));
    const Sampler sampler(model);
    const double a0 = b.alpha0.value_or(default_alpha0(model.alpha));
    std::vector<Vec> frame;
    long steps = static_cast<long>(b.m);
    if (c.body) {
      geometry();
      frame = cub->box.frame;
      steps = static_cast<long>(std::floor(sp->g * b.m) - b.m);
    } else {
      for (int j = 0; j < model.dimension; ++j) {
        Vec e(static_cast<std::size_t>(model.dimension), 0.0);
        e[static_cast<std::size_t>(j)] = 1.0;
        frame.push_back(e);
      }
    }
    for (double dlt : {b.delta, 0.0}) {
      const auto f = check_fluctuation(sampler, frame, b.m, steps, 1.0 / a0 + dlt, b.reps, c.master_seed, workers);
      const double thr = 1.0 - b.delta - 3.0 * f.se;
      const std::string p = kv({{"m", fmt(b.m)}, {"steps", std::to_string(steps)}, {"alpha0", fmt(a0)}, {"window_delta", fmt(dlt)}});
      if (dlt > 0.0)
        rows.push_back(row("fluctuation", p, f.probability, thr, f.probability > thr, f.probability - thr));
      else  // reference: without the delta margin the window is at the fluctuation scale
        rows.push_back(row("fluctuation_no_margin", p, f.probability, 1.0 - b.delta, f.probability < 1.0 - b.delta,
                           1.0 - b.delta - f.probability));
    }
  }
  if (wants("kolmogorov")) {
    const RVModel model = centered(need_model(c, "bench"));
    const Sampler sampler(model);
    const double x = std::pow(static_cast<double>(b.kolmogorov_m), 0.8);
    const auto k = check_kolmogorov(sampler, b.kolmogorov_m, x, b.reps, c.master_seed, workers);
    rows.push_back(row("kolmogorov_constant", kv({{"m", std::to_string(b.kolmogorov_m)}, {"x", fmt(x)}}), k.constant, 10.0,
                       k.constant <= 10.0, 10.0 - k.constant));
    const double x1 = 1e4 * model.radial_scale, x2 = 1e6 * model.radial_scale;
    const double tslope = loglog_slope(truncated_second_moment, model, x1, x2);
    const double theory_t = model.alpha < 2.0 ? 2.0 - model.alpha : 0.0;
    rows.push_back(row("truncated_moment_slope", kv({{"x1", fmt(x1)}, {"x2", fmt(x2)}, {"theory", fmt(theory_t)}}), tslope,
                       0.1, std::abs(tslope - theory_t) <= 0.1, 0.1 - std::abs(tslope - theory_t)));
    const double shape_slope = tslope - 2.0, theory_s = theory_t - 2.0;
    rows.push_back(row("kolmogorov_shape_slope", kv({{"x1", fmt(x1)}, {"x2", fmt(x2)}, {"theory", fmt(theory_s)}}),
                       shape_slope, 0.1, std::abs(shape_slope - theory_s) <= 0.1, 0.1 - std::abs(shape_slope - theory_s)));
  }
  if (wants("directed_rv")) {
    const RVModel model = need_model(c, "bench");
    if (model.mode != Mode::multivariate) throw ConfigError("directed_rv needs a multivariate model");
    const Sampler sampler(model);
    const std::size_t nd = static_cast<std::size_t>(b.directions);
    std::vector<Vec> dirs(nd);
    Rng rng(c.master_seed, 0, stream_id(StreamPurpose::bench, 6));
    for (Vec& u : dirs) {
      u.resize(static_cast<std::size_t>(model.dimension));
      for (double& v : u) v = rng.normal();
      u = normalized(u);
    }
    std::vector<DirectedRvResult> res(nd);
    parallel_for(nd, workers, [&](std::size_t i) {
      res[i] = check_directed_rv(sampler, dirs[i], b.samples, b.hill_k, derive_key(c.master_seed, i, 7));
    });
    for (std::size_t i = 0; i < nd; ++i) {
      const double err = std::abs(res[i].hill_alpha - model.alpha);
      const std::string p = kv({{"direction", join(dirs[i])}, {"samples", std::to_string(b.samples)}, {"k", std::to_string(b.hill_k)}});
      rows.push_back(row("directed_rv_hill", p, res[i].hill_alpha, 0.15, err <= 0.15, 0.15 - err));
      rows.push_back(row("directed_rv_constant", p, res[i].constants.back(), 0.0, res[i].positive, res[i].constants.back()));
    }
  }
  if (wants("hlms")) {
    const RVModel model = centered(need_model(c, "bench"));
    const Sampler sampler(model);
    const auto hr = check_hlms_ratio(sampler, b.hlms_c, b.n_grid, b.reps, c.master_seed, workers);
    for (std::size_t i = 1; i < hr.size(); ++i) {
      const double gap = std::abs(hr[i].ratio - hr[i - 1].ratio), tol = 3.0 * std::hypot(hr[i].se, hr[i - 1].se);
      rows.push_back(row("hlms_stability", kv({{"n", std::to_string(hr[i].n)}, {"n_prev", std::to_string(hr[i - 1].n)}}), gap, tol,
                         gap <= tol, tol - gap));
    }
    const double mu = std::pow(b.hlms_c, -model.alpha);
    const double gap = std::abs(hr.back().ratio - mu), tol = 3.0 * hr.back().se;
    rows.push_back(row("hlms_limit", kv({{"n", std::to_string(hr.back().n)}, {"mu_B", fmt(mu)}}), hr.back().ratio, mu,
                       gap <= tol, tol - gap));
  }
  if (wants("projection_audit")) {
    const ConvexBody& body = need_body(c, "bench");
    const Sampler sampler(centered(need_model(c, "bench")));
    const auto a = projection_bound_audit(body, sampler, b.audit_n, std::max<std::size_t>(b.reps, 100), c.master_seed, workers);
    const double slack = a.p_projected - a.p_full + 3.0 * std::hypot(a.se_full, a.se_projected);
    rows.push_back(row("projection_inequality", kv({{"n", std::to_string(b.audit_n)}, {"direction", join(a.direction)}}),
                       a.p_full, a.p_projected, a.inequality, slack));
    rows.push_back(row("projection_gap", kv({{"bound", fmt(a.bound_exponent)}, {"phi", fmt(a.phi)}}), a.gap, 1e-6,
                       a.gap > 1e-6, a.gap - 1e-6));
  }
  return rows;
}

RunManifest cmd_bench(const ExperimentConfig& c, const RunContext& ctx) {
  RunManifest man = start("bench", c);
  const auto rows = run_bench_checks(c, ctx.workers);
  CsvTable t({"check", "parameters", "statistic", "threshold", "pass", "margin"});
  bool all = true;
  for (const CheckRow& r : rows) {
    t.add({r.check, r.parameters, fmt(r.statistic), fmt(r.threshold), r.pass ? "pass" : "fail", fmt(r.margin)});
    all = all && r.pass;
  }
  write_output(ctx.out, "checks.csv", t.str(), man);
  if (!all) man.status = "findings";
  return man;
}

RunManifest cmd_sample(const ExperimentConfig& c, const RunContext& ctx) {
  RunManifest man = start("sample", c);
  const RVModel& model = need_model(c, "sample");
  const Sampler sampler(model.alpha > 1.0 ? centered(model) : model);
  const SampleBlock blk = c.sample.value_or(SampleBlock{});
  const SampleBatch batch = sample_batch(sampler, c.master_seed, blk.count);
  std::vector<std::string> header;
  for (int j = 1; j <= sampler.dimension(); ++j) header.push_back("x_" + std::to_string(j));
  CsvTable t(header);
  for (const Vec& x : batch.steps) {
    std::vector<std::string> r;
    for (double v : x) r.push_back(fmt(v));
    t.add(std::move(r));
  }
  write_output(ctx.out, "sample.csv", t.str(), man);
  return man;
}

namespace {

using Command = RunManifest (*)(const ExperimentConfig&, const RunContext&);

Command lookup(const std::string& name) {
  static const std::map<std::string, Command> table = {{"exponent", cmd_exponent}, {"estimate", cmd_estimate},
                                                       {"path", cmd_path},         {"bench", cmd_bench},
                                                       {"sample", cmd_sample}};
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown command '" + name + "'");
  return it->second;
}

int code_for(const std::exception& e) {
  if (dynamic_cast<const HypothesisError*>(&e)) return exit_hypothesis;
  if (dynamic_cast<const ExtinctionError*>(&e)) return exit_extinction;
  return exit_config;
}

// Runs one command and always leaves a manifest entry behind.
int run_one(const std::string& command, const ExperimentConfig& c, const RunContext& ctx, std::vector<RunManifest>& out) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest man;
  int code = exit_ok;
  try {
    man = lookup(command)(c, ctx);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = code_for(e);
    man.command = command;
    man.config_digest = hex64(config_digest(c));
    man.version = code_version();
    man.status = std::string("error: ") + e.what();
  }
  man.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.push_back(std::move(man));
  return code;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"persistence probabilities of heavy-tailed random walks in convex cones"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out_dir;
  for (const char* name : {"exponent", "estimate", "path", "bench", "sample", "campaign"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "override master_seed");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "override output_dir");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  std::vector<RunManifest> manifests;
  std::filesystem::path out = out_dir.empty() ? std::filesystem::path("out") : std::filesystem::path(out_dir);
  int code = exit_ok;
  try {
    if (command == "campaign") {
      const auto runs = load_campaign(config_path);
      for (std::size_t i = 0; i < runs.size(); ++i) {
        ExperimentConfig c = load_config(runs[i].config);
        if (seed) c.master_seed = *seed;
        const RunContext ctx{out / (std::to_string(i + 1) + "_" + runs[i].command), workers, &std::cerr};
        const int rc = run_one(runs[i].command, c, ctx, manifests);
        if (code == exit_ok) code = rc;
      }
    } else {
      ExperimentConfig c = load_config(config_path);
      if (seed) c.master_seed = *seed;
      out = out_dir.empty() ? c.output_dir : std::filesystem::path(out_dir);
      code = run_one(command, c, RunContext{out, workers, &std::cerr}, manifests);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    RunManifest man;
    man.command = command;
    man.version = code_version();
    man.status = std::string("error: ") + e.what();
    manifests.push_back(std::move(man));
    code = code_for(e);
  }
  write_manifest(out, manifests);
  return code;
}

}  // namespace persist
