#pragma once

#include <cstdint>
#include <random>

namespace smbm {

// All stochastic code draws from this engine. Streams are never shared across
// threads; each chain/sample derives its own from (master seed, index).
using Rng = std::mt19937_64;

// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Child stream for work item `index` under `master`. `domain` separates
// independent uses of the same index (e.g. initial state vs. weight noise).
Rng derive_stream(std::uint64_t master, std::uint64_t index, std::uint64_t domain = 0);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t domain = 0) noexcept;

// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via the Box-Muller transform. Written out instead of using
// std::normal_distribution so draws are identical across standard libraries.
double standard_normal(Rng& rng) noexcept;

}  // namespace smbm
