#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "persist/config.hpp"
#include "persist/proof_bench.hpp"
#include "persist/report.hpp"

namespace persist {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_hypothesis = 3, exit_extinction = 4 };

struct RunContext {
  std::filesystem::path out;
  int workers = 1;
  std::ostream* log = nullptr;  // warnings; null silences them
};

// Each command writes its files into ctx.out and records them in the returned manifest entry.
RunManifest cmd_exponent(const ExperimentConfig& config, const RunContext& ctx);
RunManifest cmd_estimate(const ExperimentConfig& config, const RunContext& ctx);
RunManifest cmd_path(const ExperimentConfig& config, const RunContext& ctx);
RunManifest cmd_bench(const ExperimentConfig& config, const RunContext& ctx);
RunManifest cmd_sample(const ExperimentConfig& config, const RunContext& ctx);

std::vector<CheckRow> run_bench_checks(const ExperimentConfig& config, int workers);
const std::vector<std::string>& bench_check_names();

// argv-level entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace persist
