#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "persist/convex.hpp"
#include "persist/engine.hpp"
#include "persist/sampler.hpp"

namespace persist {

struct ExponentBlock {
  std::vector<double> deltas = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  double tol = 1e-8;
  bool projection = true;
};

struct EstimateBlock {
  std::vector<long> n_grid;
  ScheduleKind schedule = ScheduleKind::upper_u;
  ScheduleParams schedule_params;
  std::size_t effort = 10000;
  int macro_replications = 10;
  std::size_t direct_reps = 0;  // 0 skips the direct estimate
  bool svg = false;
};

struct PathBlock {
  double a = 1.0, b = 2.0;
  long c1 = 4;
  long n = 1000000;
  double alpha = 1.5;
  int per_decade = 50;
};

struct BenchBlock {
  std::vector<std::string> checks;
  int i_first = 2, i_last = 40;
  double epsilon = 0.1, rho = 0.05, delta = 0.1;
  std::optional<double> alpha0;
  long C1 = 4;
  double kappa = 0.5;
  double growth_eta = 0.1;
  long distance_c1 = 3;
  double m = 1e4;
  std::size_t reps = 1000;
  long kolmogorov_m = 1000;
  std::size_t samples = 1000000;
  std::size_t hill_k = 2000;
  int directions = 20;
  std::vector<long> n_grid = {100, 200, 400};
  double hlms_c = 1.0;
  long audit_n = 100;
};

struct SampleBlock {
  std::size_t count = 1000;
};

struct ExperimentConfig {
  std::optional<RVModel> model;
  std::optional<ConvexBody> body;
  std::optional<ExponentBlock> exponent;
  std::optional<EstimateBlock> estimate;
  std::optional<PathBlock> path;
  std::optional<BenchBlock> bench;
  std::optional<SampleBlock> sample;
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir = "out";
  std::string canonical;  // normalised text used for the digest
};

struct CampaignRun {
  std::string command;
  std::filesystem::path config;
};

// Throw ConfigError on malformed input or unknown keys.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::vector<CampaignRun> load_campaign(const std::filesystem::path& path);

std::uint64_t config_digest(const ExperimentConfig& config);

}  // namespace persist
