#include "berman/rng.hpp"

#include <cmath>

#include "berman/normal.hpp"

namespace berman {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) noexcept {
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

CounterStream::CounterStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t row) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      ctr_{static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32), stream, 0u} {}

void CounterStream::seek(std::uint32_t block) noexcept {
  ctr_[3] = block;
  pos_ = 2;
}

void CounterStream::refill() noexcept {
  const auto out = Philox4x32::block(ctr_, key_);
  ++ctr_[3];
  for (int k = 0; k < 2; ++k) {
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(out[2 * k]) << 32) | static_cast<std::uint64_t>(out[2 * k + 1]);
    // 53 bits mapped to the midpoints of a 2^-53 grid: never 0, never 1.
    buf_[k] = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }
  pos_ = 0;
}

double CounterStream::uniform() noexcept {
  if (pos_ == 2) refill();
  return buf_[pos_++];
}

double CounterStream::normal() noexcept { return normal_quantile(uniform()); }

double CounterStream::exponential() noexcept { return -std::log(uniform()); }

}  // namespace berman
