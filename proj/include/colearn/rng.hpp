#pragma once

#include <cstdint>
#include <random>

namespace colearn {

/// One splitmix64 step; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// What a derived seed is used for. Distinct purposes never share streams.
enum class SeedPurpose : std::uint64_t {
  rho_run = 1,
  training = 2,
  testing = 3,
  sampler = 4,
  misc = 5,
};

/// Seed for (trial, purpose, index), derived from a master seed by chaining
/// splitmix64 over the fields. Independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, SeedPurpose purpose, std::uint64_t index);

/// Portable uniform generator on top of mt19937_64. Doubles are built from the
/// top 53 bits, so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace colearn
