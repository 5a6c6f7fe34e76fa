#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace lyap {

/// Philox 4x32-10 counter-based generator. Stateless: each (key, counter)
/// pair maps to an independent 128-bit block, so noise increments depend only
/// on (seed, stream, step) and never on scheduling or call order.
struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
      const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

inline double u64_to_unit(std::uint64_t v) {
  return static_cast<double>(v >> 11) * 0x1.0p-53;  // [0, 1)
}

/// Standard normal draw keyed by (seed, stream, step): one independent
/// Gaussian stream per forcing vector, reproducible under any parallel
/// schedule.
inline double gaussian_increment(std::uint64_t seed, std::uint32_t stream, std::uint64_t step) {
  const auto out = Philox4x32::block(
      {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), stream, 0u},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const std::uint64_t hi = (std::uint64_t(out[0]) << 32) | out[1];
  const std::uint64_t lo = (std::uint64_t(out[2]) << 32) | out[3];
  const double u1 = 1.0 - u64_to_unit(hi);  // (0, 1]
  const double u2 = u64_to_unit(lo);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

/// Uniform in [0,1) keyed the same way (used for auxiliary draws).
inline double uniform_increment(std::uint64_t seed, std::uint32_t stream, std::uint64_t step) {
  const auto out = Philox4x32::block(
      {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), stream,
       0x9E3779B9u},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  return u64_to_unit((std::uint64_t(out[0]) << 32) | out[1]);
}

}  // namespace lyap
