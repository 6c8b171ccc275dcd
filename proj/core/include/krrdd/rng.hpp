#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace krrdd {

/// Seeded random stream with a fixed, library-independent output sequence.
///
/// The engine is std::mt19937_64, whose output is pinned by the standard.
/// Conversions to uniforms, normals (trigonometric Box-Muller) and bounded
/// integers are done here rather than through <random> distributions, whose
/// output is implementation-defined.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/box-muller/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform integer on [0, bound). `bound` must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Standard normal.
  double normal();

  /// `count` distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

  /// Uniform permutation of [0, n).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent substream seed: the parent seed and each key are
/// folded in order through mix64. Used as the documented seed-splitting rule
/// for sweeps (master -> grid point -> replicate -> stage).
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> keys);

}  // namespace krrdd
