#pragma once

#include <array>
#include <cstdint>

namespace thermocap {

// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key);

// Stream ids: one per (trial, purpose) so that trials can be replayed in any order.
inline uint64_t stream_id(uint64_t trial, uint32_t substream = 0) {
  return (trial << 16) ^ static_cast<uint64_t>(substream);
}

// Counter-based stream. The key is the master seed; the stream index and a
// block counter form the Philox counter. No state is shared between streams.
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }
  uint64_t counter() const { return block_; }

  using result_type = uint32_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }
  result_type operator()() { return next_u32(); }

  uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }
  // Uniform on the open interval (0,1) with 53-bit resolution.
  double uniform();
  double normal();  // ziggurat (Boost.Random)
  double exponential();

 private:
  void refill();

  uint64_t seed_;
  uint64_t stream_;
  uint64_t block_ = 0;
  std::array<uint32_t, 4> buf_{};
  int pos_ = 4;
};

}  // namespace thermocap
