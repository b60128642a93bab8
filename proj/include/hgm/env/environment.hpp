#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "hgm/random.hpp"
#include "hgm/tree/search_tree.hpp"

namespace hgm::env {

// Ground truth hidden from the search policy.
struct LatentAgent {
  double u = 0.0;  // per-task success probability before difficulty offsets
  double m = 0.0;  // metaproductivity: shifts the expected utility of children
  std::size_t type = 0;  // lineage type; only meaningful with a typed lineage
};

// Finite lineage kernel: each type has a fixed utility and a distribution over
// child types. Used to line the environment up with exhaustively solvable cases.
struct TypedLineage {
  std::vector<double> utilities;
  std::vector<std::vector<double>> transition;
  std::size_t root_type = 0;
};

struct EnvConfig {
  std::size_t task_count = 60;
  double root_u = 0.4;
  double root_m = 0.5;
  double drift_gain = 0.0;
  double sigma_u = 0.0;
  double sigma_m = 0.0;
  double u_m_coupling = 0.0;
  // Per-task additive offsets to the success probability; empty means uniform.
  std::vector<double> task_difficulty;
  // Optional simulated wall latency per executor call: constant + Exp(mean).
  double latency_constant_ms = 0.0;
  double latency_exp_mean_ms = 0.0;
  // Probability that an executor call fails (fault injection for runtime tests).
  double failure_rate = 0.0;
  std::optional<TypedLineage> typed;

  void validate() const;

  // Lineage model used throughout the mismatch experiments: negative u/m
  // coupling makes lucky high-scoring children carry poor metaproductivity.
  static EnvConfig mismatch();
};

// Tree plus ground truth, indexed by node id.
struct LatentWorld {
  SearchTree tree{1};
  std::vector<LatentAgent> latents;
};

inline double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

double difficulty_offset(const EnvConfig& cfg, TaskId task);

// Success probability clip01(u + offset(task)).
double success_probability(const LatentAgent& agent, TaskId task, const EnvConfig& cfg);

LatentAgent spawn_root(const EnvConfig& cfg);

// Gaussian lineage:
//   u' = clip01(u + drift_gain (m - 1/2) + sigma_u g1)
//   m' = clip01(m + sigma_m (rho g1 + sqrt(1 - rho^2) g2))
// with exactly two normal draws (four words). The typed lineage consumes one word.
LatentAgent mutate(const LatentAgent& parent, const EnvConfig& cfg, RandomStream& rng);

// Bernoulli(success_probability); exactly one word.
bool evaluate_task(const LatentAgent& agent, TaskId task, const EnvConfig& cfg, RandomStream& rng);

// Plain text, one real per line; blank lines and '#' comments are skipped.
std::vector<double> read_difficulty_file(const std::filesystem::path& path);

}  // namespace hgm::env
