#include "hgm/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hgm/errors.hpp"

namespace hgm::metrics {

std::optional<AgentId> empirical_cmp_argmax(const SearchTree& tree, AgentId node) {
  std::optional<AgentId> best;
  double best_mean = -1.0;
  for (AgentId id : tree.clade_members(node)) {
    if (id == node) continue;
    const auto mean = tree.node(id).empirical_mean();
    if (!mean) continue;
    if (*mean > best_mean || (*mean == best_mean && id < *best)) {
      best = id;
      best_mean = *mean;
    }
  }
  return best;
}

std::optional<double> empirical_cmp(const SearchTree& tree, AgentId node) {
  const auto arg = empirical_cmp_argmax(tree, node);
  if (!arg) return std::nullopt;
  return tree.node(*arg).empirical_mean();
}

std::optional<Prediction> adjusted_cmp_prediction(const SearchTree& tree, AgentId node) {
  const auto arg = empirical_cmp_argmax(tree, node);
  if (!arg) return std::nullopt;
  // Walk up from the maximizer to the child of `node` on its path.
  AgentId b_star = *arg;
  while (tree.node(b_star).parent != node) {
    const auto parent = tree.node(b_star).parent;
    if (!parent) throw UsageError("argmax descendant is not below the node");
    b_star = *parent;
  }
  const AgentNode& a = tree.node(node);
  const AgentNode& b = tree.node(b_star);
  const std::uint64_t s = a.clade_success - a.n_success - b.clade_success;
  const std::uint64_t f = a.clade_failure - a.n_failure - b.clade_failure;
  if (s + f == 0) return std::nullopt;
  return Prediction{static_cast<double>(s) / static_cast<double>(s + f), static_cast<double>(s + f), s, f};
}

std::optional<Prediction> baseline_cmp_prediction(const SearchTree& tree, AgentId node) {
  const AgentNode& a = tree.node(node);
  const auto mean = a.empirical_mean();
  if (!mean) return std::nullopt;
  return Prediction{*mean, static_cast<double>(a.evaluations()), a.n_success, a.n_failure};
}

std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys,
                              std::span<const double> weights) {
  if (xs.size() != ys.size()) throw ParameterError("pearson needs equally long coordinates");
  if (!weights.empty() && weights.size() != xs.size()) throw ParameterError("pearson weights length mismatch");
  if (xs.size() < 2) throw ParameterError("pearson needs at least two points");
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double wsum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(w(i) >= 0.0) || !std::isfinite(w(i))) throw ParameterError("pearson weights must be nonnegative");
    wsum += w(i);
  }
  if (wsum <= 0.0) throw ParameterError("pearson weights must not all be zero");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += w(i) * xs[i];
    my += w(i) * ys[i];
  }
  mx /= wsum;
  my /= wsum;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += w(i) * dx * dx;
    syy += w(i) * dy * dy;
    sxy += w(i) * dx * dy;
  }
  // Relative threshold so constant inputs with rounding noise read as constant.
  const double scale_x = std::max(1.0, mx * mx) * wsum * 1e-24;
  const double scale_y = std::max(1.0, my * my) * wsum * 1e-24;
  if (sxx <= scale_x || syy <= scale_y) return std::nullopt;
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

Estimator estimator_for(policy::PolicyKind kind) {
  return kind == policy::PolicyKind::HGM ? Estimator::AdjustedClade : Estimator::OwnMean;
}

const char* to_string(Estimator estimator) {
  return estimator == Estimator::AdjustedClade ? "adjusted_clade" : "own_mean";
}

CorrelationReport correlation_report(const SearchTree& tree, Estimator estimator) {
  CorrelationReport report;
  report.estimator = estimator;
  for (const AgentNode& n : tree.nodes()) {
    const auto target = empirical_cmp(tree, n.id);
    if (!target) continue;
    const auto pred = estimator == Estimator::AdjustedClade ? adjusted_cmp_prediction(tree, n.id)
                                                            : baseline_cmp_prediction(tree, n.id);
    if (!pred) continue;
    report.pairs.push_back({n.id, pred->value, *target, pred->weight});
  }
  if (report.pairs.size() >= 2) {
    std::vector<double> xs, ys, ws;
    for (const auto& p : report.pairs) {
      xs.push_back(p.prediction);
      ys.push_back(p.target);
      ws.push_back(p.weight);
    }
    report.unweighted_r = pearson(xs, ys);
    report.weighted_r = pearson(xs, ys, ws);
  }
  return report;
}

}  // namespace hgm::metrics
