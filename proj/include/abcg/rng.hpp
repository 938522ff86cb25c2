// Copyright 2026 The abcgibbs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ABCG_RNG_HPP
#define ABCG_RNG_HPP

#include <cstdint>
#include <limits>

namespace abcg {

/// 64-bit finalizer from SplitMix64 (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Splittable random stream identified by (seed, stream-id).
///
/// The generator is SplittableRandom-style: the initial state and the odd
/// increment are both derived from (seed, stream-id), so two streams with
/// different ids never share mutable state and `split()` is a pure function
/// of the parent's identity, not of how many draws the parent has made.
///
/// Satisfies UniformRandomBitGenerator. All variate generation used by the
/// library goes through the member helpers below, which makes the draw
/// sequence identical across standard library implementations.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : seed_{seed}, stream_{stream_id} {
    const std::uint64_t key = mix64(seed ^ mix64(stream_id + 0x632be59bd9b4e019ULL));
    state_ = mix64(key);
    gamma_ = mix64(key + 0x9e3779b97f4a7c15ULL) | 1ULL;
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix64(state_ += gamma_); }

  /// Child stream `i`; depends only on (seed, stream-id, i).
  [[nodiscard]] RngStream split(std::uint64_t i) const noexcept {
    return RngStream{seed_, mix64(stream_ * 0xd1342543de82ef95ULL + i + 1)};
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_; }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via the Marsaglia polar method (spare value cached).
  double normal() noexcept;

  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape) noexcept;

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t state_ = 0;
  std::uint64_t gamma_ = 1;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace abcg

#endif  // ABCG_RNG_HPP
