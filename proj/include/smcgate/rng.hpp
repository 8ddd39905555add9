#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "smcgate/errors.hpp"
#include "smcgate/field.hpp"

namespace smcgate {

/// Injected randomness. Seedable implementations make transcripts
/// reproducible and let tests enumerate every draw sequence.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  /// Uniform draw from [0, bound), bound >= 1.
  virtual std::uint64_t uniform(std::uint64_t bound) = 0;
};

/// mt19937_64 with hand-rolled rejection sampling. std::uniform_int_distribution
/// is not pinned by the standard, so it cannot back deterministic transcripts.
class Mt19937Random final : public RandomSource {
 public:
  explicit Mt19937Random(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t uniform(std::uint64_t bound) override {
    if (bound == 0) {
      throw Error(ErrorCode::ConfigError, "uniform bound must be positive");
    }
    // Reject draws below 2^64 mod bound, then reduce.
    std::uint64_t threshold = (0 - bound) % bound;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v < threshold);
    return v % bound;
  }

 private:
  std::mt19937_64 gen_;
};

/// Replays a fixed draw sequence. Used by unit tests and the exhaustive
/// small-field enumeration oracles.
class ScriptedRandom final : public RandomSource {
 public:
  explicit ScriptedRandom(std::vector<std::uint64_t> values)
      : values_(std::move(values)) {}

  std::uint64_t uniform(std::uint64_t bound) override {
    if (next_ >= values_.size()) {
      throw Error(ErrorCode::ConfigError, "scripted randomness exhausted");
    }
    std::uint64_t v = values_[next_++];
    if (v >= bound) {
      throw Error(ErrorCode::ConfigError, "scripted draw out of bound");
    }
    return v;
  }

  std::size_t consumed() const { return next_; }

 private:
  std::vector<std::uint64_t> values_;
  std::size_t next_ = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-node seed derivation so one scenario seed drives every node stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(base ^ h);
}

inline FieldElement Field::sample(RandomSource& rng) const {
  return FieldElement(rng.uniform(p_));
}

}  // namespace smcgate
