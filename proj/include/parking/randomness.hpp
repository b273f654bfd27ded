#pragma once

#include <array>
#include <cstdint>

namespace parking {

enum class Purpose : std::uint32_t { Role = 0, Walk = 1, Tie = 2 };

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based source: every draw is a pure function of
/// (seed, purpose, origin, time), so runs can be replayed, coupled and
/// split across threads without changing a single value.
class RandomnessSource {
 public:
  constexpr explicit RandomnessSource(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform in [0,1) with 53 random bits.
  double draw(Purpose purpose, std::uint64_t origin, std::uint64_t time) const noexcept;
  std::uint64_t bits(Purpose purpose, std::uint64_t origin, std::uint64_t time) const noexcept;

 private:
  std::uint64_t seed_;
};

/// Deterministic per-replica seed derivation.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

}  // namespace parking
