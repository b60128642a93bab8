#pragma once

#include <cstdint>

#include "hgm/env/true_cmp.hpp"
#include "hgm/runtime/run_config.hpp"

namespace hgm::runtime {

// Expands `node` once, then lets the configured policy run the whole tree until
// budget_B evaluations exist. Each rollout draws one word for its run seed.
env::Rollout make_policy_rollout(const RunConfig& cfg);

// Runs the configured policy on a fresh tree rooted at a copy of `node`
// with `evaluations` evaluations of budget, and grafts the result under `node`.
env::Rollout make_subtree_rollout(const RunConfig& cfg, std::uint64_t evaluations);

}  // namespace hgm::runtime
