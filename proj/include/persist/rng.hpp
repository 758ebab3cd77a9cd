#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace persist {

// Philox4x32-10 counter-based generator. The 64-bit key selects a stream; the 128-bit
// counter walks through it. Streams are derived deterministically from
// (master_seed, replication, stream) so that any work partition reproduces the same draws.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_key(std::uint64_t master_seed, std::uint64_t replication, std::uint64_t stream);

class Rng {
 public:
  using result_type = std::uint64_t;

  Rng() = default;
  Rng(std::uint64_t master_seed, std::uint64_t replication, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();

  std::uint64_t key() const { return key_; }

 private:
  void refill();

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Stream identifiers; combined with a level/macro index into the `stream` argument.
enum class StreamPurpose : std::uint64_t {
  walk = 1,
  resample = 2,
  sample_batch = 3,
  calibration = 4,
  bench = 5,
};

constexpr std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t a = 0, std::uint64_t b = 0) {
  return (static_cast<std::uint64_t>(purpose) << 56) ^ (a << 28) ^ b;
}

}  // namespace persist
