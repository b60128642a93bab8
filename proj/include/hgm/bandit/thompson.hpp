#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "hgm/bandit/beta.hpp"
#include "hgm/random.hpp"

namespace hgm::bandit {

struct Candidate {
  std::uint64_t id;
  BetaParams params;
};

// Draws one posterior sample per candidate, in the given order, and returns the
// id of the largest draw. Exact ties go to the smallest id.
std::uint64_t thompson_select(std::span<const Candidate> candidates, RandomStream& rng);

// Posterior sharpening multiplier. Values at or above one once any budget is spent.
class Tau {
 public:
  explicit Tau(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

// tau = B / b for total budget B and remaining budget b, 1 <= b <= B.
Tau scheduler_tau(std::uint64_t total_budget, std::uint64_t remaining_budget);

}  // namespace hgm::bandit
