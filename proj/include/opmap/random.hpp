#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace opmap {

using Rng = std::mt19937_64;

/// Independent generator for (master seed, stream labels). The same labels
/// always give the same stream, so work split into labelled chunks is
/// reproducible regardless of how chunks are scheduled.
inline Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> labels) {
  std::seed_seq::result_type words[16];
  std::size_t n = 0;
  words[n++] = static_cast<std::uint32_t>(master);
  words[n++] = static_cast<std::uint32_t>(master >> 32);
  for (auto label : labels) {
    if (n + 2 > 16) break;
    words[n++] = static_cast<std::uint32_t>(label);
    words[n++] = static_cast<std::uint32_t>(label >> 32);
  }
  std::seed_seq seq(words, words + n);
  return Rng(seq);
}

/// Uniform double on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  for (;;) {
    const double u = std::generate_canonical<double, 53>(rng);
    if (u > 0.0 && u < 1.0) return u;
  }
}

}  // namespace opmap
