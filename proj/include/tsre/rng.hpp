#pragma once

#include <array>
#include <cstdint>

namespace tsre {

/// Philox4x32-10 block function (Salmon et al., SC'11). Maps a 128-bit counter
/// and 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer, used to derive child seeds.
std::uint64_t mix64(std::uint64_t x);

/// Stream of uniforms and standard normals addressed by
/// (seed, realization, tag). Streams with different addresses are independent
/// and any stream can be regenerated without touching the others.
///
/// Normals use the Box-Muller transform on two 53-bit uniforms per pair:
///   r = sqrt(-2 ln u1), z0 = r cos(2 pi u2), z1 = r sin(2 pi u2),
/// with u1 in (0, 1] and u2 in [0, 1). No tail truncation.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t realization, std::uint32_t tag)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        realization_(realization),
        tag_(tag) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t realization_;
  std::uint32_t tag_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Tag namespaces so that sample entries, solver start vectors and test
/// fixtures never share a stream.
namespace rng_tag {
inline constexpr std::uint32_t bond = 0x00000000u;     // + edge index
inline constexpr std::uint32_t field = 0x40000000u;    // + vertex index
inline constexpr std::uint32_t solver = 0x80000000u;   // + run index
inline constexpr std::uint32_t auxiliary = 0xC0000000u;
}  // namespace rng_tag

}  // namespace tsre
