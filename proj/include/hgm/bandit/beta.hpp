#pragma once

#include "hgm/random.hpp"

namespace hgm::bandit {

// Shape pair of a Beta posterior. Both shapes are finite and strictly positive.
class BetaParams {
 public:
  BetaParams(double alpha, double beta);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double mean() const noexcept { return alpha_ / (alpha_ + beta_); }

  friend bool operator==(const BetaParams&, const BetaParams&) = default;

 private:
  double alpha_;
  double beta_;
};

// log B(a, b).
double log_beta_function(double a, double b);

// Regularized incomplete beta I_x(a, b): the Beta(a, b) CDF at x in [0, 1].
// Lentz continued fraction, evaluated on whichever side of the mean converges.
double reg_inc_beta(double x, const BetaParams& params);

// x in (0, 1) with I_x(a, b) = q, for q strictly inside (0, 1).
// Newton steps safeguarded by a shrinking bisection bracket.
double beta_quantile(double q, const BetaParams& params);

// One Beta(a, b) draw in the open interval (0, 1).
//
// Consumes exactly one word from `rng`. That word seeds a private SplitMix64
// substream feeding two Marsaglia-Tsang gamma variates (X / (X + Y)), so the
// caller's stream position never depends on rejection counts.
double sample_beta(const BetaParams& params, RandomStream& rng);

}  // namespace hgm::bandit
