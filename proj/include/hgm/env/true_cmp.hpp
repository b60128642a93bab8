#pragma once

#include <cstddef>
#include <functional>

#include "hgm/env/environment.hpp"
#include "hgm/random.hpp"

namespace hgm::env {

// Advances a copy of the world to budget exhaustion, starting with whatever
// action the rollout associates with `node`. Must only draw from `rng`.
using Rollout = std::function<void(LatentWorld& world, AgentId node, RandomStream& rng)>;

struct TrueCmp {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t rollouts = 0;
};

// Monte-Carlo average of the best true utility inside the clade of `node`
// after each rollout.
TrueCmp true_cmp(const LatentWorld& world, AgentId node, const Rollout& rollout, std::size_t rollouts,
                 RandomStream& rng);

double clade_max_utility(const LatentWorld& world, AgentId node);

}  // namespace hgm::env
