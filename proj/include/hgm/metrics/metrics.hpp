#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hgm/policy/policy.hpp"
#include "hgm/tree/search_tree.hpp"

namespace hgm::metrics {

// Best empirical mean among strict descendants with at least one evaluation.
std::optional<double> empirical_cmp(const SearchTree& tree, AgentId node);

// Smallest-id strict descendant attaining empirical_cmp.
std::optional<AgentId> empirical_cmp_argmax(const SearchTree& tree, AgentId node);

struct Prediction {
  double value = 0.0;
  double weight = 0.0;  // evaluations the prediction draws on
  std::uint64_t successes = 0;
  std::uint64_t failures = 0;
};

// Clade counts of `node` minus its own counts minus the clade counts of the
// child subtree holding the empirical argmax. Empty when the target is
// undefined or nothing is left after the exclusions.
std::optional<Prediction> adjusted_cmp_prediction(const SearchTree& tree, AgentId node);

// The node's own empirical mean, weighted by its own evaluation count.
std::optional<Prediction> baseline_cmp_prediction(const SearchTree& tree, AgentId node);

// Weighted Pearson correlation; empty when either coordinate has zero
// weighted variance. Throws ParameterError on fewer than two points, length
// mismatch, or negative / all-zero weights.
std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys,
                              std::span<const double> weights = {});

enum class Estimator { AdjustedClade, OwnMean };

Estimator estimator_for(policy::PolicyKind kind);
const char* to_string(Estimator estimator);

struct CorrelationPair {
  AgentId node;
  double prediction = 0.0;
  double target = 0.0;
  double weight = 0.0;
};

struct CorrelationReport {
  Estimator estimator = Estimator::AdjustedClade;
  std::vector<CorrelationPair> pairs;
  std::optional<double> weighted_r;
  std::optional<double> unweighted_r;
  std::size_t n_used() const noexcept { return pairs.size(); }
};

// Pairs every node whose prediction and target both exist.
CorrelationReport correlation_report(const SearchTree& tree, Estimator estimator);

}  // namespace hgm::metrics
