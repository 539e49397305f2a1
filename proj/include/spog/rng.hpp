#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace spog {

/// Philox4x32-10 counter-based generator.
///
/// A stream is identified by (seed, stream id); the output at position k is a
/// pure function of (seed, stream, k). Two streams with distinct ids never
/// share state, so weights for layer l can be regenerated without replaying
/// any other layer's draws.
class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform in the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal via Box-Muller; caches the second variate.
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// One Philox4x32-10 block.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// Stable stream id from a small tuple of tags, e.g. (layer, purpose).
std::uint64_t stream_id(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace spog
