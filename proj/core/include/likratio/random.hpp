#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace likratio {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// The 64-bit key is the seed and the upper half of the counter holds a
/// stream index, so independent substreams are addressed directly as
/// (seed, stream) without any sequential state. The lower half of the
/// counter enumerates 128-bit blocks within the stream.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    if (index_ == 4) refill();
    return buffer_[index_++];
  }

  /// The raw 10-round bijection, exposed for known-answer tests.
  static Block block(Block counter, Key key) noexcept;

 private:
  void refill() noexcept;

  Key key_;
  Block counter_;
  Block buffer_{};
  unsigned index_ = 4;
};

/// Mixes tags into a base seed with the splitmix64 finalizer. Distinct tag
/// sequences give statistically unrelated seeds.
std::uint64_t derive_seed(std::uint64_t base,
                          std::initializer_list<std::uint64_t> tags) noexcept;

/// Philox substream with the uniform and normal draws used throughout.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : engine_(seed, stream) {}

  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }

 private:
  Philox4x32 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace likratio
