#include "hdcca/rng.hpp"

namespace hdcca {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Block Philox4x32::bijection(Block ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

Philox4x32::Philox4x32(StreamKey key) : key_(key) {}

void Philox4x32::refill() {
  const Block ctr{static_cast<std::uint32_t>(block_),
                  static_cast<std::uint32_t>(block_ >> 32),
                  static_cast<std::uint32_t>(key_.stream),
                  static_cast<std::uint32_t>(key_.stream >> 32)};
  const Key k{static_cast<std::uint32_t>(key_.master_seed),
              static_cast<std::uint32_t>(key_.master_seed >> 32)};
  buffer_ = bijection(ctr, k);
  ++block_;
  next_ = 0;
}

Philox4x32::result_type Philox4x32::operator()() {
  if (next_ == 4) refill();
  return buffer_[next_++];
}

void Philox4x32::discard(std::uint64_t count) {
  const std::uint64_t buffered = 4 - next_;
  if (count <= buffered) {
    next_ += static_cast<unsigned>(count);
    return;
  }
  count -= buffered;
  block_ += count / 4;
  next_ = 4;
  if (count % 4 != 0) {
    refill();
    next_ = static_cast<unsigned>(count % 4);
  }
}

}  // namespace hdcca
