#ifndef DISCOFLUX_RNG_HPP
#define DISCOFLUX_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace discoflux {

/// Counter-based Philox4x32-10 stream.
///
/// A stream is fully determined by (seed, stream id); draws advance a 64-bit
/// block counter. Independent replicas use distinct stream ids under one
/// master seed, so results do not depend on scheduling order.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential waiting time with the given rate (> 0).
  double exponential(double rate) noexcept;

  std::uint64_t blocks_drawn() const noexcept { return counter_; }

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

/// Raw Philox4x32-10 bijection, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

}  // namespace discoflux

#endif  // DISCOFLUX_RNG_HPP
