#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace hwml {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
// The output for a given (key, counter) is fixed by the algorithm, so
// every stream is reproducible across compilers and platforms.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

// Seeded stream of random numbers. A (seed, stream) pair names an
// independent sequence; the state is just a block index.
//
// All distributions are implemented here rather than through <random>
// because the standard distributions are implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  // Uniform integer on the closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept;
  // Standard normal via Box-Muller (one variate per call).
  double normal() noexcept;

  template <typename T>
  void shuffle(std::vector<T>& values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  void refill() noexcept;

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
};

// Derives a child seed from a parent seed and a label, so that separate
// consumers (folds, candidate sets, noise) never share a stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

// 64-bit FNV-1a; used for stable content digests.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

// Randomly shifted Halton points on [0,1)^dims (Cranley-Patterson rotation).
// Row i of the result is the (offset + i + 1)-th Halton point plus the
// seeded shift, modulo 1.
std::vector<std::vector<double>> shifted_halton(std::size_t count, std::size_t dims,
                                                std::uint64_t seed, std::size_t offset = 0);

}  // namespace hwml
