#pragma once

#include <array>
#include <cstdint>

namespace nsp::rng {

// Philox4x32-10 block function (Salmon et al. counter-based generator).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

// Two independent uniforms in (0,1) with 53-bit resolution, for counter (a, b) under key seed.
std::array<double, 2> uniform_pair(std::uint64_t seed, std::uint64_t a, std::uint64_t b);
// Two independent standard normals (Box-Muller on uniform_pair).
std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t a, std::uint64_t b);
inline double normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b) { return normal_pair(seed, a, b)[0]; }

// Deterministic seed derivation (splitmix64 finalizer over the pair).
std::uint64_t mix(std::uint64_t a, std::uint64_t b);

}  // namespace nsp::rng
