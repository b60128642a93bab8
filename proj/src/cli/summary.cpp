#include "hgm/cli/summary.hpp"

#include <algorithm>
#include <cmath>

#include "hgm/errors.hpp"

namespace hgm::cli {

std::string default_run_id(const runtime::RunConfig& cfg) {
  return std::string(policy::to_string(cfg.policy_kind)) + "-" + std::to_string(cfg.seed);
}

RunSummary summarize(const runtime::RunConfig& cfg, const runtime::RunResult& result, std::string run_id,
                     double wall_time_s) {
  RunSummary s;
  s.run_id = std::move(run_id);
  s.policy_kind = cfg.policy_kind;
  s.seed = cfg.seed;
  s.best_belief = result.best_belief;
  s.best_belief_true_utility = result.latents.at(result.best_belief.index).u;
  s.best_belief_empirical_mean = result.tree.node(result.best_belief).empirical_mean();
  s.tree_size = result.tree.size();
  s.evaluations = result.tree.total_evaluations();
  s.completed = result.completed;
  s.wall_time_s = wall_time_s;
  return s;
}

runtime::Json to_json(const RunSummary& s) {
  runtime::Json j;
  j["run_id"] = s.run_id;
  j["policy_kind"] = policy::to_string(s.policy_kind);
  j["seed"] = s.seed;
  j["best_belief"] = s.best_belief.index;
  j["best_belief_true_utility"] = s.best_belief_true_utility;
  j["best_belief_empirical_mean"] =
      s.best_belief_empirical_mean ? runtime::Json(*s.best_belief_empirical_mean) : runtime::Json(nullptr);
  j["tree_size"] = s.tree_size;
  j["evaluations"] = s.evaluations;
  j["completed"] = s.completed;
  return j;
}

Interval bootstrap_mean_ci(std::span<const double> values, std::size_t resamples, double level,
                           std::uint64_t seed) {
  if (values.empty()) throw ParameterError("bootstrap needs at least one value");
  if (resamples == 0) throw ParameterError("bootstrap needs at least one resample");
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("confidence level must lie in (0,1)");
  Interval out;
  out.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());

  RandomStream rng = RandomStream::keyed(seed, StreamDomain::Bootstrap, 0);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[rng.index_below(values.size())];
    m = s / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, resamples - 1);
    const double frac = pos - static_cast<double>(lo);
    return means[lo] + frac * (means[hi] - means[lo]);
  };
  out.low = at(tail);
  out.high = at(1.0 - tail);
  return out;
}

}  // namespace hgm::cli
