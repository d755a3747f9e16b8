#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace adamlab {

// Philox4x32-10 (Salmon et al., Random123). Stateless: every draw is a pure
// function of (key, counter), so coordinates and steps can be generated in
// any order or in parallel with identical results.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Block apply(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Uniform double in the open interval (0, 1) built from 53 random bits.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      (std::uint64_t{hi >> 5} << 26) | std::uint64_t{lo >> 6};
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

// Counter-based generator keyed by a 64-bit seed. A draw is addressed by two
// 64-bit coordinates (typically parameter index and step/lane); streams are
// separated by folding a tag into the key.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed = 0) : seed_(seed) {}

  constexpr std::uint64_t seed() const { return seed_; }

  /// Independent generator derived from this one; tags name sub-experiments.
  constexpr CounterRng substream(std::uint64_t tag) const {
    return CounterRng(mix(seed_ ^ mix(tag + 0x632BE59BD9B4E019ull)));
  }

  Philox4x32::Block block(std::uint64_t a, std::uint64_t b) const {
    const Philox4x32::Block ctr{static_cast<std::uint32_t>(a),
                                static_cast<std::uint32_t>(a >> 32),
                                static_cast<std::uint32_t>(b),
                                static_cast<std::uint32_t>(b >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed_),
                              static_cast<std::uint32_t>(seed_ >> 32)};
    return Philox4x32::apply(ctr, key);
  }

  double uniform(std::uint64_t a, std::uint64_t b) const {
    const auto x = block(a, b);
    return to_open_unit(x[0], x[1]);
  }

  double normal(std::uint64_t a, std::uint64_t b) const {
    const auto x = block(a, b);
    const double u1 = to_open_unit(x[0], x[1]);
    const double u2 = to_open_unit(x[2], x[3]);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// +1 or -1 with probability 1/2 each.
  double sign(std::uint64_t a, std::uint64_t b) const {
    return (block(a, b)[0] & 1u) ? 1.0 : -1.0;
  }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

// Sequential view over a CounterRng for code that consumes draws in order
// (matrix fills, bootstrap replicates). Satisfies UniformRandomBitGenerator.
class SequentialRng {
 public:
  using result_type = std::uint32_t;

  explicit SequentialRng(CounterRng base, std::uint64_t lane = 0)
      : base_(base), lane_(lane) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    if (slot_ == 4) refill();
    return buffer_[slot_++];
  }

  double uniform() {
    const std::uint32_t hi = (*this)();
    const std::uint32_t lo = (*this)();
    return to_open_unit(hi, lo);
  }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double sign() { return ((*this)() & 1u) ? 1.0 : -1.0; }

 private:
  void refill() {
    buffer_ = base_.block(counter_++, lane_);
    slot_ = 0;
  }

  CounterRng base_;
  std::uint64_t lane_;
  std::uint64_t counter_ = 0;
  Philox4x32::Block buffer_{};
  int slot_ = 4;
};

}  // namespace adamlab
