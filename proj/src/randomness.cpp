#include "parking/randomness.hpp"

namespace parking {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::uint64_t RandomnessSource::bits(Purpose purpose, std::uint64_t origin,
                                     std::uint64_t time) const noexcept {
  // Counter layout: {time lo, time hi, origin lo, origin hi (24 bits) | purpose << 24}.
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(time), static_cast<std::uint32_t>(time >> 32),
      static_cast<std::uint32_t>(origin),
      static_cast<std::uint32_t>((origin >> 32) & 0x00FFFFFFu) |
          (static_cast<std::uint32_t>(purpose) << 24)};
  const auto out = philox4x32(ctr, {static_cast<std::uint32_t>(seed_),
                                    static_cast<std::uint32_t>(seed_ >> 32)});
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double RandomnessSource::draw(Purpose purpose, std::uint64_t origin,
                              std::uint64_t time) const noexcept {
  return static_cast<double>(bits(purpose, origin, time) >> 11) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  // splitmix64 finalizer over the combined input
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace parking
