#pragma once

#include <cstdint>
#include <random>

namespace qad {

/// Random stream owned by a single trial.
using RandomStream = std::mt19937_64;

/// Derives the stream for trial `index` of a run seeded with `seed`.
///
/// The derivation depends only on the pair, so any trial can be replayed in
/// isolation and the result does not depend on which thread executes it.
inline RandomStream derive_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return RandomStream(seq);
}

}  // namespace qad
