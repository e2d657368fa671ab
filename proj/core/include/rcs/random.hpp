#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rcs {

using Rng = std::mt19937_64;

/// Mixes a base seed with stream/trial/window identifiers so that independent
/// draws never share an engine state.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> salt);

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> salt = {}) {
  return Rng{derive_seed(seed, salt)};
}

}  // namespace rcs
