#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "hgm/runtime/drivers.hpp"
#include "hgm/runtime/run_config.hpp"

namespace hgm::cli {

struct RunSummary {
  std::string run_id;
  policy::PolicyKind policy_kind = policy::PolicyKind::HGM;
  std::uint64_t seed = 0;
  AgentId best_belief;
  double best_belief_true_utility = 0.0;
  std::optional<double> best_belief_empirical_mean;
  std::size_t tree_size = 0;
  std::uint64_t evaluations = 0;
  bool completed = false;
  double wall_time_s = 0.0;  // kept out of every deterministic output
};

std::string default_run_id(const runtime::RunConfig& cfg);

RunSummary summarize(const runtime::RunConfig& cfg, const runtime::RunResult& result, std::string run_id,
                     double wall_time_s);

// Deterministic fields only.
runtime::Json to_json(const RunSummary& summary);

struct Interval {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
  std::size_t n = 0;
};

// Percentile bootstrap of the mean. Deterministic in `seed`.
Interval bootstrap_mean_ci(std::span<const double> values, std::size_t resamples = 10000, double level = 0.95,
                           std::uint64_t seed = 0);

}  // namespace hgm::cli
