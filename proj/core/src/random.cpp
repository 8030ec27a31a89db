#include "smbm/random.hpp"

#include <cmath>
#include <numbers>

namespace smbm {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t domain) noexcept {
  return mix64(mix64(mix64(master) ^ index) ^ (domain * 0xd6e8feb86659fd93ULL));
}

Rng derive_stream(std::uint64_t master, std::uint64_t index, std::uint64_t domain) {
  return Rng(derive_seed(master, index, domain));
}

double standard_normal(Rng& rng) noexcept {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace smbm
