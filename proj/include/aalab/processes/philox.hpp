#pragma once

// Philox4x32-10 counter-based generator and the per-path Gaussian stream
// built on it. A stream is addressed by (seed, generator tag, path index);
// its values never depend on how paths are scheduled.

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

#include "aalab/core/error.hpp"

namespace aalab {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// 32-bit FNV-1a, used to turn generator labels into stream tags.
inline std::uint32_t fnv1a32(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

/// Standard normal variates for one path; two per Philox block (Box-Muller).
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::string_view generator_id, std::uint64_t path)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_(static_cast<std::uint32_t>(path)), tag_(fnv1a32(generator_id)) {
    if (path > 0xFFFFFFFFull) throw InvalidArgument("path index exceeds 2^32");
  }

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto r = philox4x32_10({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                  path_, tag_},
                                 key_);
    ++block_;
    const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    const double u1 = (static_cast<double>(a >> 11) + 1.0) * kScale;  // (0, 1]
    const double u2 = static_cast<double>(b >> 11) * kScale;          // [0, 1)
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * M_PI * u2;
    spare_ = rad * std::sin(ang);
    have_spare_ = true;
    return rad * std::cos(ang);
  }

 private:
  PhiloxKey key_;
  std::uint32_t path_;
  std::uint32_t tag_;
  std::uint64_t block_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace aalab
