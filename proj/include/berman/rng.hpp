#pragma once

#include <array>
#include <cstdint>

namespace berman {

/// Philox4x32-10 counter-based block cipher (Salmon et al., SC'11). The output
/// is a pure function of (counter, key), which is what lets any partition of
/// the replication index space reproduce the same draws.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept;
};

/// Sequential view over one (seed, stream, row) key. Every replication of every
/// simulation owns exactly one row, so draws never depend on scheduling.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t row) noexcept;

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal via inverse CDF of uniform().
  double normal() noexcept;
  /// Unit exponential via -log(uniform()).
  double exponential() noexcept;

  /// Restart at the given block index (two doubles per block).
  void seek(std::uint32_t block) noexcept;

 private:
  void refill() noexcept;

  Philox4x32::Key key_{};
  Philox4x32::Counter ctr_{};
  std::array<double, 2> buf_{};
  int pos_ = 2;
};

/// Well-known stream ids so that different consumers of the same seed never
/// share uniforms by accident.
namespace streams {
inline constexpr std::uint32_t kGaussian = 0;
inline constexpr std::uint32_t kScaling = 1;
inline constexpr std::uint32_t kMask = 2;
inline constexpr std::uint32_t kExtremal = 3;
}  // namespace streams

}  // namespace berman
