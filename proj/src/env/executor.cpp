#include "hgm/env/executor.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <thread>

#include "hgm/errors.hpp"

namespace hgm::env {

SyntheticExecutor::SyntheticExecutor(EnvConfig cfg, std::uint64_t seed)
    : SyntheticExecutor(cfg, seed, {spawn_root(cfg)}) {}

SyntheticExecutor::SyntheticExecutor(EnvConfig cfg, std::uint64_t seed, std::vector<LatentAgent> agents)
    : cfg_(std::move(cfg)), seed_(seed), agents_(std::move(agents)) {
  cfg_.validate();
  if (agents_.empty()) throw ParameterError("SyntheticExecutor needs at least a root agent");
}

void SyntheticExecutor::maybe_fail_and_wait(std::uint64_t action_seq) {
  if (cfg_.failure_rate > 0.0) {
    RandomStream fault = RandomStream::keyed(seed_, StreamDomain::ActionFailure, action_seq);
    if (fault.uniform_open() < cfg_.failure_rate) {
      throw ExecutorFailure("injected failure for action " + std::to_string(action_seq));
    }
  }
  if (cfg_.latency_constant_ms > 0.0 || cfg_.latency_exp_mean_ms > 0.0) {
    RandomStream delay = RandomStream::keyed(seed_, StreamDomain::ActionLatency, action_seq);
    const double ms = cfg_.latency_constant_ms - cfg_.latency_exp_mean_ms * std::log(delay.uniform_open());
    {
      std::lock_guard lock(mutex_);
      latency_total_ms_ += ms;
    }
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
  }
}

AgentHandle SyntheticExecutor::expand(AgentHandle parent, std::uint64_t action_seq) {
  const LatentAgent p = latent(parent);
  maybe_fail_and_wait(action_seq);
  RandomStream rng = RandomStream::keyed(seed_, StreamDomain::ActionOutcome, action_seq);
  const LatentAgent child = mutate(p, cfg_, rng);
  std::lock_guard lock(mutex_);
  agents_.push_back(child);
  return agents_.size() - 1;
}

bool SyntheticExecutor::evaluate(AgentHandle agent, TaskId task, std::uint64_t action_seq) {
  const LatentAgent a = latent(agent);
  maybe_fail_and_wait(action_seq);
  RandomStream rng = RandomStream::keyed(seed_, StreamDomain::ActionOutcome, action_seq);
  return evaluate_task(a, task, cfg_, rng);
}

LatentAgent SyntheticExecutor::latent(AgentHandle handle) const {
  std::lock_guard lock(mutex_);
  if (handle >= agents_.size()) throw UsageError("unknown agent handle " + std::to_string(handle));
  return agents_[handle];
}

double SyntheticExecutor::simulated_latency_ms() const {
  std::lock_guard lock(mutex_);
  return latency_total_ms_;
}

}  // namespace hgm::env
