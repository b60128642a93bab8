#include "hgm/bandit/thompson.hpp"

#include <cmath>

#include "hgm/errors.hpp"

namespace hgm::bandit {

std::uint64_t thompson_select(std::span<const Candidate> candidates, RandomStream& rng) {
  if (candidates.empty()) throw UsageError("thompson_select: no candidates");
  std::uint64_t best_id = 0;
  double best_draw = -1.0;
  for (const Candidate& c : candidates) {
    const double draw = sample_beta(c.params, rng);
    if (draw > best_draw || (draw == best_draw && c.id < best_id)) {
      best_draw = draw;
      best_id = c.id;
    }
  }
  return best_id;
}

Tau::Tau(double value) : value_(value) {
  if (!std::isfinite(value) || value <= 0.0) throw ParameterError("Tau must be finite and positive");
}

Tau scheduler_tau(std::uint64_t total_budget, std::uint64_t remaining_budget) {
  if (remaining_budget == 0 || remaining_budget > total_budget) {
    throw ParameterError("scheduler_tau: remaining budget must lie in [1, total]");
  }
  return Tau(static_cast<double>(total_budget) / static_cast<double>(remaining_budget));
}

}  // namespace hgm::bandit
