#pragma once

#include <cstdint>
#include <random>

namespace innolab {

/// Reproducible random source keyed by (master seed, substream, lane).
///
/// The substream is the ensemble member index, so a member's draws never
/// depend on how members are scheduled across workers. Lanes separate the
/// independent sources used for one member (driving noise, auxiliary draws,
/// hidden-signal noise, filter particles).
class RandomStream {
 public:
  enum Lane : std::uint64_t { kNoise = 0, kAux = 1, kHidden = 2, kFilter = 3 };

  constexpr RandomStream(std::uint64_t seed, std::uint64_t substream, std::uint64_t lane = kNoise) noexcept
      : seed_(seed), substream_(substream), lane_(lane) {}

  [[nodiscard]] constexpr std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] constexpr std::uint64_t substream() const noexcept { return substream_; }
  [[nodiscard]] constexpr std::uint64_t lane() const noexcept { return lane_; }

  [[nodiscard]] constexpr RandomStream with_lane(std::uint64_t lane) const noexcept {
    return {seed_, substream_, lane};
  }

  /// Fresh engine positioned at the start of this stream.
  [[nodiscard]] std::mt19937_64 engine() const {
    std::seed_seq seq{low(seed_), high(seed_), low(substream_), high(substream_), low(lane_), high(lane_)};
    return std::mt19937_64(seq);
  }

 private:
  static constexpr std::uint32_t low(std::uint64_t x) noexcept { return static_cast<std::uint32_t>(x); }
  static constexpr std::uint32_t high(std::uint64_t x) noexcept { return static_cast<std::uint32_t>(x >> 32); }

  std::uint64_t seed_;
  std::uint64_t substream_;
  std::uint64_t lane_;
};

}  // namespace innolab
