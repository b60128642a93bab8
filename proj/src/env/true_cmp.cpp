#include "hgm/env/true_cmp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hgm/errors.hpp"

namespace hgm::env {

double clade_max_utility(const LatentWorld& world, AgentId node) {
  double best = 0.0;
  for (AgentId id : world.tree.clade_members(node)) best = std::max(best, world.latents.at(id.index).u);
  return best;
}

TrueCmp true_cmp(const LatentWorld& world, AgentId node, const Rollout& rollout, std::size_t rollouts,
                 RandomStream& rng) {
  if (rollouts == 0) throw ParameterError("true_cmp needs at least one rollout");
  if (!world.tree.contains(node)) throw ParameterError("true_cmp: unknown node");
  if (world.latents.size() != world.tree.size()) throw UsageError("true_cmp: one latent per node required");
  std::vector<double> values;
  values.reserve(rollouts);
  for (std::size_t r = 0; r < rollouts; ++r) {
    LatentWorld copy = world;
    if (rollout) rollout(copy, node, rng);
    values.push_back(clade_max_utility(copy, node));
  }
  const double n = static_cast<double>(rollouts);
  TrueCmp out;
  out.rollouts = rollouts;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / n;
  if (rollouts > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.standard_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

}  // namespace hgm::env
