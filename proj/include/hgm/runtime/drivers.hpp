#pragma once

#include <cstddef>
#include <vector>

#include "hgm/env/environment.hpp"
#include "hgm/env/executor.hpp"
#include "hgm/runtime/coordinator.hpp"
#include "hgm/runtime/events.hpp"
#include "hgm/runtime/run_config.hpp"
#include "hgm/tree/search_tree.hpp"

namespace hgm::runtime {

struct RunResult {
  SearchTree tree;
  AgentId best_belief;
  EventLog log;
  std::vector<env::LatentAgent> latents;  // ground truth per node id
  bool completed = false;  // exactly budget_B evaluations committed
  double simulated_latency_ms = 0.0;
};

// Decide -> execute -> commit, one action at a time.
void drive_sequential(Coordinator& coord, env::Executor& executor);

// Keeps up to `workers` actions in flight on a thread pool. Decisions and
// commits stay on the calling thread. In-flight work left when the budget is
// reached is discarded.
void drive_async(Coordinator& coord, env::Executor& executor, std::size_t workers);

RunResult run_sequential(const RunConfig& cfg, bool record_log = true);
RunResult run_async(const RunConfig& cfg);

using env::LatentWorld;

// Runs the configured policy from `world` until budget_B evaluations exist in
// the tree (no init expansions, no log). Action keys start at `first_action_seq`.
void continue_sequential(const RunConfig& cfg, LatentWorld& world, std::uint64_t first_action_seq);

}  // namespace hgm::runtime
