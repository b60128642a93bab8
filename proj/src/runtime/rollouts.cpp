#include "hgm/runtime/rollouts.hpp"

#include "hgm/env/executor.hpp"
#include "hgm/errors.hpp"
#include "hgm/runtime/drivers.hpp"

namespace hgm::runtime {

namespace {

// Rollout action keys live far above any real run's action sequence.
constexpr std::uint64_t kRolloutActionBase = std::uint64_t{1} << 40;

}  // namespace

env::Rollout make_policy_rollout(const RunConfig& cfg) {
  return [cfg](env::LatentWorld& world, AgentId node, RandomStream& rng) {
    if (world.tree.total_evaluations() >= cfg.budget_B) return;
    RunConfig run = cfg;
    run.seed = rng.next_word();
    run.env.latency_constant_ms = 0.0;
    run.env.latency_exp_mean_ms = 0.0;
    run.env.failure_rate = 0.0;
    RandomStream expand_rng = RandomStream::keyed(run.seed, StreamDomain::Rollout, 0);
    world.latents.push_back(env::mutate(world.latents.at(node.index), run.env, expand_rng));
    world.tree.add_child(node);
    continue_sequential(run, world, kRolloutActionBase);
  };
}

env::Rollout make_subtree_rollout(const RunConfig& cfg, std::uint64_t evaluations) {
  if (evaluations == 0) throw ParameterError("subtree rollout needs a positive budget");
  return [cfg, evaluations](env::LatentWorld& world, AgentId node, RandomStream& rng) {
    RunConfig run = cfg;
    run.seed = rng.next_word();
    run.budget_B = evaluations;
    run.env.latency_constant_ms = 0.0;
    run.env.latency_exp_mean_ms = 0.0;
    run.env.failure_rate = 0.0;
    env::LatentWorld sub{SearchTree(run.env.task_count), {world.latents.at(node.index)}};
    continue_sequential(run, sub, kRolloutActionBase);
    std::vector<AgentId> mapped(sub.tree.size(), node);
    for (std::size_t i = 1; i < sub.tree.size(); ++i) {
      const AgentNode& n = sub.tree.node(AgentId{i});
      mapped[i] = world.tree.add_child(mapped[n.parent->index]);
      world.latents.push_back(sub.latents[i]);
    }
  };
}

}  // namespace hgm::runtime
