#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hgm::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitVerification = 2,
  kExitCapacity = 3,
};

struct RunCommand {
  std::filesystem::path config;
  std::vector<std::string> overrides;  // flat "--key value" pairs
  std::filesystem::path out_dir;
};

// Writes events.ndjson, tree.json, summary.json and meta.json into out_dir.
int cmd_run(const RunCommand& cmd, std::ostream& out, std::ostream& err);

struct SweepCommand {
  std::filesystem::path config;
  std::vector<std::string> overrides;
  std::vector<std::string> policies;
  std::uint64_t seed_begin = 0;
  std::uint64_t seed_end = 0;  // exclusive
  std::size_t resamples = 10000;
  std::filesystem::path out_csv;
};

int cmd_sweep(const SweepCommand& cmd, std::ostream& out, std::ostream& err);

struct AnalyzeCommand {
  std::vector<std::filesystem::path> logs;
  std::filesystem::path out_dir;  // correlations.csv, pairs.csv
};

int cmd_analyze(const AnalyzeCommand& cmd, std::ostream& out, std::ostream& err);

struct OracleCheckCommand {
  std::optional<std::filesystem::path> instances;
  std::size_t random = 0;
  std::size_t max_types = 4;
  std::size_t max_budget = 4;
  std::uint64_t seed = 0;
  double inject_cmp_fault = 0.0;
  std::uint64_t max_trajectories = 1'000'000;
  std::optional<std::filesystem::path> report;
};

int cmd_oracle_check(const OracleCheckCommand& cmd, std::ostream& out, std::ostream& err);

struct ReplayCommand {
  std::filesystem::path log;
};

int cmd_replay(const ReplayCommand& cmd, std::ostream& out, std::ostream& err);

// Parses "A:B" (half-open) or a single integer N meaning "0:N".
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text);

}  // namespace hgm::cli
