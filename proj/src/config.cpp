#include "persist/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "persist/error.hpp"
#include "persist/report.hpp"

namespace persist {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  return get<T>(j, key, where, T{});
}

AngularSpec parse_angular(const json& j) {
  only_keys(j, "angular", {"kind", "mean_direction", "concentration", "densities", "atomic"});
  AngularSpec a;
  const auto kind = get<std::string>(j, "kind", "angular", "uniform");
  if (kind == "uniform") {
    a.kind = AngularKind::uniform;
  } else if (kind == "von_mises_fisher" || kind == "vmf") {
    a.kind = AngularKind::von_mises_fisher;
  } else if (kind == "piecewise") {
    a.kind = AngularKind::piecewise;
  } else {
    throw ConfigError("angular.kind must be uniform, von_mises_fisher or piecewise");
  }
  a.mean_direction = get<Vec>(j, "mean_direction", "angular", {});
  a.concentration = get<double>(j, "concentration", "angular", 0.0);
  a.densities = get<std::vector<double>>(j, "densities", "angular", {});
  a.atomic = get<bool>(j, "atomic", "angular", false);
  return a;
}

RVModel parse_model(const json& j, const std::string& where) {
  only_keys(j, where, {"mode", "dimension", "alpha", "radial_scale", "bulk_fraction", "angular", "tail_balance",
                       "components", "master_seed"});
  const auto mode = get<std::string>(j, "mode", where, "multivariate");
  RVModel m;
  if (mode == "nonstandard_product") {
    if (!j.contains("components") || !j["components"].is_array())
      throw ConfigError(where + ".components must list one 1-D model per coordinate");
    std::vector<RVModel> comps;
    for (std::size_t i = 0; i < j["components"].size(); ++i)
      comps.push_back(parse_model(j["components"][i], where + ".components[" + std::to_string(i) + "]"));
    m = nonstandard(std::move(comps));
  } else {
    const double alpha = require<double>(j, "alpha", where);
    if (!(alpha > 1.0)) throw HypothesisError(where + ": hypothesis alpha > 1 (finite mean) fails, alpha = " + std::to_string(alpha));
    const double xm = get<double>(j, "radial_scale", where, 1.0);
    const double bf = get<double>(j, "bulk_fraction", where, 0.0);
    if (mode == "one_dimensional") {
      TailBalance tb;
      if (j.contains("tail_balance")) {
        only_keys(j["tail_balance"], where + ".tail_balance", {"p_minus", "alpha_minus"});
        tb.p_minus = get<double>(j["tail_balance"], "p_minus", where, 0.0);
        tb.alpha_minus = get<double>(j["tail_balance"], "alpha_minus", where, 0.0);
      }
      if (get<int>(j, "dimension", where, 1) != 1) throw ConfigError(where + ": one_dimensional needs dimension 1");
      m = one_dimensional(alpha, xm, tb.p_minus, tb.alpha_minus, bf);
      if (j.contains("angular")) m.angular.atomic = parse_angular(j["angular"]).atomic;
    } else if (mode == "multivariate") {
      if (j.contains("tail_balance")) throw ConfigError(where + ".tail_balance applies to one_dimensional models");
      AngularSpec a = j.contains("angular") ? parse_angular(j["angular"]) : AngularSpec{};
      m = multivariate(require<int>(j, "dimension", where), alpha, a, xm, bf);
    } else {
      throw ConfigError(where + ".mode must be multivariate, one_dimensional or nonstandard_product");
    }
  }
  validate(m);
  return m;
}

ConvexBody parse_body(const json& j) {
  const auto type = require<std::string>(j, "type", "body");
  if (type == "polytope") {
    only_keys(j, "body", {"type", "halfspaces"});
    std::vector<Halfspace> hs;
    for (const auto& row : require<std::vector<std::vector<double>>>(j, "halfspaces", "body")) {
      if (row.size() < 2) throw ConfigError("body.halfspaces rows are [a..., b]");
      hs.push_back({Vec(row.begin(), row.end() - 1), row.back()});
    }
    return ConvexBody::polytope(std::move(hs));
  }
  if (type == "box") {
    only_keys(j, "body", {"type", "lo", "hi"});
    return ConvexBody::box(require<Vec>(j, "lo", "body"), require<Vec>(j, "hi", "body"));
  }
  if (type == "ball") {
    only_keys(j, "body", {"type", "center", "radius"});
    return ConvexBody::ball(require<Vec>(j, "center", "body"), require<double>(j, "radius", "body"));
  }
  throw ConfigError("body.type must be polytope, box or ball");
}

ScheduleKind parse_schedule_kind(const std::string& s) {
  if (s == "upper_u" || s == "u") return ScheduleKind::upper_u;
  if (s == "lower_m" || s == "m") return ScheduleKind::lower_m;
  throw ConfigError("estimate.schedule.kind must be upper_u or lower_m");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "config", {"model", "body", "exponent", "estimate", "path", "bench", "sample", "master_seed", "output_dir"});
  ExperimentConfig c;
  c.canonical = j.dump();
  if (j.contains("model")) {
    c.model = parse_model(j["model"], "model");
    if (j["model"].contains("master_seed")) c.master_seed = j["model"]["master_seed"].get<std::uint64_t>();
  }
  if (j.contains("body")) c.body = parse_body(j["body"]);
  c.master_seed = get<std::uint64_t>(j, "master_seed", "config", c.master_seed);
  c.output_dir = get<std::string>(j, "output_dir", "config", "out");
  if (c.model && c.body && c.model->dimension != c.body->dim())
    throw ConfigError("model and body dimensions differ");

  if (j.contains("exponent")) {
    const json& e = j["exponent"];
    only_keys(e, "exponent", {"deltas", "tol", "projection"});
    ExponentBlock b;
    b.deltas = get(e, "deltas", "exponent", b.deltas);
    b.tol = get(e, "tol", "exponent", b.tol);
    b.projection = get(e, "projection", "exponent", b.projection);
    if (!(b.tol > 0.0)) throw ConfigError("exponent.tol must be positive");
    for (double d : b.deltas)
      if (!(d > 0.0)) throw ConfigError("exponent.deltas must be positive");
    c.exponent = b;
  }
  if (j.contains("estimate")) {
    const json& e = j["estimate"];
    only_keys(e, "estimate", {"n_grid", "schedule", "effort", "macro_replications", "direct_reps", "svg"});
    EstimateBlock b;
    b.n_grid = require<std::vector<long>>(e, "n_grid", "estimate");
    if (b.n_grid.empty()) throw ConfigError("estimate.n_grid is empty");
    for (long n : b.n_grid)
      if (n < 1) throw ConfigError("estimate.n_grid entries must be positive");
    if (e.contains("schedule")) {
      const json& s = e["schedule"];
      only_keys(s, "estimate.schedule", {"kind", "c1", "eta", "rho"});
      b.schedule = parse_schedule_kind(get<std::string>(s, "kind", "estimate.schedule", "upper_u"));
      b.schedule_params.c1 = get(s, "c1", "estimate.schedule", b.schedule_params.c1);
      b.schedule_params.eta = get(s, "eta", "estimate.schedule", b.schedule_params.eta);
      b.schedule_params.rho = get(s, "rho", "estimate.schedule", b.schedule_params.rho);
    }
    b.effort = get(e, "effort", "estimate", b.effort);
    b.macro_replications = get(e, "macro_replications", "estimate", b.macro_replications);
    b.direct_reps = get(e, "direct_reps", "estimate", b.direct_reps);
    b.svg = get(e, "svg", "estimate", b.svg);
    if (b.effort < 2 || b.macro_replications < 1) throw ConfigError("estimate needs effort >= 2 and macro_replications >= 1");
    c.estimate = b;
  }
  if (j.contains("path")) {
    const json& e = j["path"];
    only_keys(e, "path", {"a", "b", "c1", "n", "alpha", "per_decade"});
    PathBlock b;
    b.a = get(e, "a", "path", b.a);
    b.b = get(e, "b", "path", b.b);
    b.c1 = get(e, "c1", "path", b.c1);
    b.n = get(e, "n", "path", b.n);
    b.alpha = get(e, "alpha", "path", b.alpha);
    b.per_decade = get(e, "per_decade", "path", b.per_decade);
    c.path = b;
  }
  if (j.contains("bench")) {
    const json& e = j["bench"];
    only_keys(e, "bench", {"checks", "i_range", "epsilon", "rho", "delta", "alpha0", "C1", "kappa", "eta", "c1", "m", "reps",
                           "kolmogorov_m", "samples", "hill_k", "directions", "n_grid", "hlms_c", "audit_n"});
    BenchBlock b;
    b.checks = require<std::vector<std::string>>(e, "checks", "bench");
    if (e.contains("i_range")) {
      const auto r = get<std::vector<int>>(e, "i_range", "bench", {});
      if (r.size() != 2 || r[0] > r[1]) throw ConfigError("bench.i_range is [first, last]");
      b.i_first = r[0];
      b.i_last = r[1];
    }
    b.epsilon = get(e, "epsilon", "bench", b.epsilon);
    b.rho = get(e, "rho", "bench", b.rho);
    b.delta = get(e, "delta", "bench", b.delta);
    if (e.contains("alpha0")) b.alpha0 = get<double>(e, "alpha0", "bench", 0.0);
    b.C1 = get(e, "C1", "bench", b.C1);
    b.kappa = get(e, "kappa", "bench", b.kappa);
    b.growth_eta = get(e, "eta", "bench", b.growth_eta);
    b.distance_c1 = get(e, "c1", "bench", b.distance_c1);
    b.m = get(e, "m", "bench", b.m);
    b.reps = get(e, "reps", "bench", b.reps);
    b.kolmogorov_m = get(e, "kolmogorov_m", "bench", b.kolmogorov_m);
    b.samples = get(e, "samples", "bench", b.samples);
    b.hill_k = get(e, "hill_k", "bench", b.hill_k);
    b.directions = get(e, "directions", "bench", b.directions);
    b.n_grid = get(e, "n_grid", "bench", b.n_grid);
    b.hlms_c = get(e, "hlms_c", "bench", b.hlms_c);
    b.audit_n = get(e, "audit_n", "bench", b.audit_n);
    c.bench = b;
  }
  if (j.contains("sample")) {
    only_keys(j["sample"], "sample", {"count"});
    c.sample = SampleBlock{get<std::size_t>(j["sample"], "count", "sample", 1000)};
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<CampaignRun> load_campaign(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read campaign " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("campaign is not valid JSON: ") + e.what());
  }
  only_keys(j, "campaign", {"runs"});
  std::vector<CampaignRun> runs;
  for (const auto& r : require<json>(j, "runs", "campaign")) {
    only_keys(r, "campaign.runs[]", {"command", "config"});
    std::filesystem::path p = require<std::string>(r, "config", "campaign.runs[]");
    if (p.is_relative()) p = path.parent_path() / p;
    runs.push_back({require<std::string>(r, "command", "campaign.runs[]"), p});
  }
  if (runs.empty()) throw ConfigError("campaign.runs is empty");
  return runs;
}

std::uint64_t config_digest(const ExperimentConfig& config) { return fnv1a(config.canonical); }

}  // namespace persist
