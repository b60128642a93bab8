#include "hgm/bandit/beta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hgm/errors.hpp"

namespace hgm::bandit {

namespace {

constexpr double kCfEpsilon = 1e-16;
constexpr double kCfTiny = 1e-300;
constexpr int kCfMaxIterations = 100000;

// Continued fraction for I_x(a, b), valid (fast) for x < (a + 1) / (a + b + 2).
double incomplete_beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kCfTiny) d = kCfTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kCfMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kCfTiny) d = kCfTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kCfTiny) c = kCfTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kCfTiny) d = kCfTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kCfTiny) c = kCfTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kCfEpsilon) return h;
  }
  throw CapacityError("reg_inc_beta: continued fraction did not converge");
}

double log_beta_pdf(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta_function(a, b);
}

// Small counter-based generator for the sampler's private substream.
struct SubStream {
  std::uint64_t state;
  double uniform() { return word_to_open_unit(splitmix64(state)); }
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
};

// log of a Gamma(shape, 1) variate; the log form keeps tiny shapes from underflowing.
double log_gamma_variate(double shape, SubStream& gen) {
  if (shape < 1.0) {
    // Gamma(k) = Gamma(k + 1) * U^(1/k)
    const double boosted = log_gamma_variate(shape + 1.0, gen);
    return boosted + std::log(gen.uniform()) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = gen.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = gen.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return std::log(d) + std::log(v);
  }
}

}  // namespace

BetaParams::BetaParams(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || alpha <= 0.0 || beta <= 0.0) {
    throw ParameterError("BetaParams: shapes must be finite and positive, got (" +
                         std::to_string(alpha) + ", " + std::to_string(beta) + ")");
  }
}

double log_beta_function(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double reg_inc_beta(double x, const BetaParams& params) {
  if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("reg_inc_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double a = params.alpha();
  const double b = params.beta();
  const double log_front =
      a * std::log(x) + b * std::log1p(-x) - log_beta_function(a, b);
  const double front = std::exp(log_front);
  double value = 0.0;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    value = front * incomplete_beta_cf(a, b, x) / a;
  } else {
    value = 1.0 - front * incomplete_beta_cf(b, a, 1.0 - x) / b;
  }
  return std::clamp(value, 0.0, 1.0);
}

double beta_quantile(double q, const BetaParams& params) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("beta_quantile: q must lie in (0, 1)");
  const double a = params.alpha();
  const double b = params.beta();

  double lo = 0.0;
  double hi = 1.0;
  double x = std::clamp(params.mean(), 1e-12, 1.0 - 1e-12);
  for (int iter = 0; iter < 400; ++iter) {
    const double f = reg_inc_beta(x, params) - q;
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(hi, 1e-300)) break;

    // Newton candidate; fall back to the bracket midpoint when it escapes or stalls.
    double next = 0.5 * (lo + hi);
    const double log_pdf = log_beta_pdf(x, a, b);
    if (std::isfinite(log_pdf)) {
      const double newton = x - f / std::exp(log_pdf);
      if (std::isfinite(newton) && newton > lo && newton < hi) next = newton;
    }
    // Geometric midpoint when the lower tail spans many orders of magnitude.
    if (next == 0.5 * (lo + hi) && lo > 0.0 && hi / lo > 1e3) next = std::sqrt(lo * hi);
    if (next == x) break;
    x = next;
  }
  return std::clamp(x, lo, hi);
}

double sample_beta(const BetaParams& params, RandomStream& rng) {
  SubStream gen{rng.next_word()};
  const double log_x = log_gamma_variate(params.alpha(), gen);
  const double log_y = log_gamma_variate(params.beta(), gen);
  // X / (X + Y) = 1 / (1 + exp(log Y - log X))
  double draw = 1.0 / (1.0 + std::exp(log_y - log_x));
  if (draw <= 0.0) draw = std::numeric_limits<double>::min();
  if (draw >= 1.0) draw = std::nextafter(1.0, 0.0);
  return draw;
}

}  // namespace hgm::bandit
