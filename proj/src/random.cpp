#include "hgm/random.hpp"

#include <cmath>
#include <numbers>

#include "hgm/errors.hpp"

namespace hgm {

std::uint64_t derive_seed(std::uint64_t seed, StreamDomain domain, std::uint64_t index) noexcept {
  std::uint64_t state = seed;
  std::uint64_t a = splitmix64(state);
  state = a ^ (static_cast<std::uint64_t>(domain) * 0xd1b54a32d192ed03ULL);
  std::uint64_t b = splitmix64(state);
  state = b ^ (index * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
  return splitmix64(state);
}

double RandomStream::normal() {
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t RandomStream::index_below(std::size_t n) {
  if (n == 0) throw ParameterError("index_below: empty range");
  // Multiply-high keeps the cost at exactly one word; bias is below n / 2^64.
  const unsigned __int128 product = static_cast<unsigned __int128>(next_word()) * n;
  return static_cast<std::size_t>(product >> 64);
}

}  // namespace hgm
