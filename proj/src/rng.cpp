#include "thermocap/rng.hpp"

#include <cmath>

#include <boost/random/normal_distribution.hpp>

namespace thermocap {

namespace {

constexpr uint32_t kM0 = 0xD2511F53u;
constexpr uint32_t kM1 = 0xCD9E8D57u;
constexpr uint32_t kW0 = 0x9E3779B9u;
constexpr uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  uint64_t p = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(p >> 32);
  lo = static_cast<uint32_t>(p);
}

}  // namespace

std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> c, std::array<uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

void RngStream::refill() {
  std::array<uint32_t, 4> ctr{static_cast<uint32_t>(block_), static_cast<uint32_t>(block_ >> 32),
                              static_cast<uint32_t>(stream_),
                              static_cast<uint32_t>(stream_ >> 32)};
  std::array<uint32_t, 2> key{static_cast<uint32_t>(seed_), static_cast<uint32_t>(seed_ >> 32)};
  buf_ = philox4x32(ctr, key);
  ++block_;
  pos_ = 0;
}

double RngStream::uniform() {
  uint64_t a = next_u32() >> 5;
  uint64_t b = next_u32() >> 6;
  uint64_t k = (a << 26) | b;  // 53 bits
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  boost::random::normal_distribution<double> nd;
  return nd(*this);
}

double RngStream::exponential() { return -std::log(uniform()); }

}  // namespace thermocap
