#pragma once

#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "hgm/env/environment.hpp"
#include "hgm/tree/search_tree.hpp"

namespace hgm::env {

// Opaque reference to an agent living inside an executor backend.
using AgentHandle = std::uint64_t;

// Raised by a backend when an action could not be carried out.
class ExecutorFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Backend that performs self-modifications and task evaluations. Calls may
// take arbitrary wall time and may run concurrently. `action_seq` keys any
// randomness so outcomes do not depend on scheduling.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual AgentHandle root() const = 0;
  virtual AgentHandle expand(AgentHandle parent, std::uint64_t action_seq) = 0;
  virtual bool evaluate(AgentHandle agent, TaskId task, std::uint64_t action_seq) = 0;
};

// Executor over the latent lineage model. Thread-safe.
class SyntheticExecutor final : public Executor {
 public:
  SyntheticExecutor(EnvConfig cfg, std::uint64_t seed);
  // Continues from existing agents; handle i refers to agents[i].
  SyntheticExecutor(EnvConfig cfg, std::uint64_t seed, std::vector<LatentAgent> agents);

  AgentHandle root() const override { return 0; }
  AgentHandle expand(AgentHandle parent, std::uint64_t action_seq) override;
  bool evaluate(AgentHandle agent, TaskId task, std::uint64_t action_seq) override;

  LatentAgent latent(AgentHandle handle) const;
  const EnvConfig& config() const noexcept { return cfg_; }
  double simulated_latency_ms() const;

 private:
  void maybe_fail_and_wait(std::uint64_t action_seq);

  EnvConfig cfg_;
  std::uint64_t seed_;
  mutable std::mutex mutex_;
  std::vector<LatentAgent> agents_;
  double latency_total_ms_ = 0.0;
};

}  // namespace hgm::env
