#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace hdcca {

/// Identifies one independent random stream: a master seed plus a 64-bit
/// stream index. Two generators built from equal StreamKeys produce the same
/// sequence regardless of which thread constructs them.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Stream index for replication `rep` of grid cell `cell`.
constexpr StreamKey replication_stream(std::uint64_t master_seed,
                                       std::uint32_t cell, std::uint32_t rep) {
  return {master_seed, (static_cast<std::uint64_t>(cell) << 32) | rep};
}

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The key is the master seed; the 128-bit counter holds the stream index in
/// its upper half and the block position in its lower half, so every stream is
/// a disjoint slice of one keyed permutation. Satisfies
/// UniformRandomBitGenerator.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(StreamKey key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Advance by `count` 32-bit outputs.
  void discard(std::uint64_t count);

  StreamKey key() const { return key_; }

  /// The raw 10-round bijection; exposed for known-answer tests.
  static Block bijection(Block counter, Key key);

 private:
  void refill();

  StreamKey key_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  unsigned next_ = 4;
};

}  // namespace hdcca
