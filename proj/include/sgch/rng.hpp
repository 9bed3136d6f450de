#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace sgch {

/// Philox4x32-10 block function: encrypts a 128-bit counter under a 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// One independent random stream per (seed, stream id).  The stream id
/// occupies the upper counter words, the draw index the lower ones, so
/// distinct ids never overlap and a stream can be replayed from scratch.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform in the open interval (0,1) with 53-bit resolution.
  double uniform();

  /// Standard normal (Box-Muller, pairs cached).
  double normal();

  /// Child stream for a sub-purpose, e.g. per-path streams of an ensemble.
  PhiloxStream split(std::uint64_t child) const;

 private:
  std::uint64_t next_u64();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  std::optional<double> spare_normal_;
};

}  // namespace sgch
