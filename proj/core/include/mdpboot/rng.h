#pragma once

#include <array>
#include <cstdint>

namespace mdpboot {

__extension__ typedef unsigned __int128 uint128;

/// Addresses an independent random stream. Identical specs give identical
/// draws on every platform.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derive a child stream, e.g. one per experiment row.
inline constexpr RngSpec child(RngSpec parent, std::uint64_t label) noexcept {
  return RngSpec{parent.seed, splitmix64(parent.stream ^ splitmix64(label + 0x632BE59BD9B4E019ULL))};
}

/// Philox4x32-10 block function.
inline constexpr std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                                         std::array<std::uint32_t, 2> key) noexcept {
  constexpr std::uint32_t m0 = 0xD2511F53U;
  constexpr std::uint32_t m1 = 0xCD9E8D57U;
  constexpr std::uint32_t w0 = 0x9E3779B9U;
  constexpr std::uint32_t w1 = 0xBB67AE85U;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

/// Counter-based generator: the draw sequence of (spec, substream) is a pure
/// function of those two values, so trial i can be simulated by any worker.
class CounterRng {
 public:
  CounterRng(RngSpec spec, std::uint64_t substream) noexcept
      : substream_(substream) {
    const std::uint64_t k = splitmix64(spec.seed ^ splitmix64(spec.stream));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  std::uint64_t next_u64() noexcept {
    if (slot_ == 2) refill();
    return buffer_[slot_++];
  }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1].
  double uniform_open_closed() noexcept { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Integer in [0, n), n >= 1.
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<uint128>(next_u64()) * n) >> 64);
  }

 private:
  void refill() noexcept {
    const auto out = philox4x32({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                 static_cast<std::uint32_t>(substream_),
                                 static_cast<std::uint32_t>(substream_ >> 32)},
                                key_);
    ++block_;
    buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    slot_ = 0;
  }

  std::array<std::uint32_t, 2> key_{};
  std::uint64_t substream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int slot_ = 2;
};

}  // namespace mdpboot
