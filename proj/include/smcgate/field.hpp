#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "smcgate/errors.hpp"

namespace smcgate {

class Field;

/// One residue of the configured prime field. Instances are only produced by
/// Field, which reduces on construction, so value() < modulus always holds.
class FieldElement {
 public:
  FieldElement() : value_(0) {}

  std::uint64_t value() const { return value_; }

  friend bool operator==(FieldElement a, FieldElement b) {
    return a.value_ == b.value_;
  }
  friend bool operator!=(FieldElement a, FieldElement b) {
    return a.value_ != b.value_;
  }
  friend bool operator<(FieldElement a, FieldElement b) {
    return a.value_ < b.value_;
  }

 private:
  friend class Field;
  explicit FieldElement(std::uint64_t reduced) : value_(reduced) {}

  std::uint64_t value_;
};

class RandomSource;

/// Arithmetic mod a runtime-configurable prime. The default is the Mersenne
/// prime 2^61 - 1; small moduli (31, 5) are used by exhaustive tests. Only
/// addition and negation exist: linear aggregation needs nothing else.
class Field {
 public:
  static constexpr std::uint64_t kDefaultModulus = (1ULL << 61) - 1;

  Field() : p_(kDefaultModulus) {}

  explicit Field(std::uint64_t modulus) : p_(modulus) {
    if (modulus < 2 || modulus >= (1ULL << 62)) {
      throw Error(ErrorCode::ConfigError,
                  "field modulus must be in [2, 2^62)");
    }
  }

  std::uint64_t modulus() const { return p_; }

  FieldElement element(std::uint64_t raw) const {
    return FieldElement(raw % p_);
  }

  FieldElement zero() const { return FieldElement(0); }

  FieldElement add(FieldElement a, FieldElement b) const {
    std::uint64_t s = a.value() + b.value();
    if (s >= p_) s -= p_;
    return FieldElement(s);
  }

  FieldElement neg(FieldElement a) const {
    return FieldElement(a.value() == 0 ? 0 : p_ - a.value());
  }

  FieldElement sub(FieldElement a, FieldElement b) const {
    return add(a, neg(b));
  }

  /// Negative inputs map to upper residues.
  FieldElement from_signed(std::int64_t v) const {
    if (v >= 0) return element(static_cast<std::uint64_t>(v));
    std::uint64_t magnitude = static_cast<std::uint64_t>(-(v + 1)) + 1;
    return neg(element(magnitude));
  }

  /// Balanced-residue interpretation: values above p/2 are negative.
  std::int64_t to_signed(FieldElement a) const {
    if (a.value() > p_ / 2) {
      return -static_cast<std::int64_t>(p_ - a.value());
    }
    return static_cast<std::int64_t>(a.value());
  }

  FieldElement sample(RandomSource& rng) const;

  friend bool operator==(const Field& a, const Field& b) {
    return a.p_ == b.p_;
  }

 private:
  std::uint64_t p_;
};

/// Sums of partial sums are decoded for at most this many contributors;
/// the codec overflow bound below scales with it.
inline constexpr int kMaxAggregationParticipants = 16;

/// Maps sensor readings to field residues: round(x * 2^fraction_bits),
/// negatives as upper residues. Sums stay exact in the field as long as the
/// range invariant 2 * half_range * 2^fraction_bits < p holds.
struct FixedPointCodec {
  unsigned fraction_bits = 16;
  std::uint64_t half_range = 1ULL << 40;

  void validate(const Field& field) const {
    if (fraction_bits > 48) {
      throw Error(ErrorCode::ConfigError, "fraction_bits too large");
    }
    __uint128_t span = (static_cast<__uint128_t>(half_range) << fraction_bits) * 2;
    if (half_range == 0 || span >= field.modulus()) {
      throw Error(ErrorCode::ConfigError,
                  "codec range does not fit the field modulus");
    }
  }

  friend bool operator==(const FixedPointCodec&, const FixedPointCodec&) = default;
};

inline FieldElement encode_fixed(double x, const FixedPointCodec& codec,
                                 const Field& field) {
  if (!std::isfinite(x) || std::fabs(x) > static_cast<double>(codec.half_range)) {
    throw Error(ErrorCode::OutOfRange, "reading exceeds codec half_range");
  }
  // Scaling by a power of two is exact in binary floating point.
  double scaled = x * static_cast<double>(1ULL << codec.fraction_bits);
  return field.from_signed(static_cast<std::int64_t>(std::llround(scaled)));
}

inline double decode_fixed(FieldElement a, const FixedPointCodec& codec,
                           const Field& field) {
  std::int64_t s = field.to_signed(a);
  __uint128_t bound = (static_cast<__uint128_t>(codec.half_range)
                       << codec.fraction_bits) *
                      kMaxAggregationParticipants;
  __uint128_t magnitude =
      s < 0 ? static_cast<__uint128_t>(-(s + 1)) + 1 : static_cast<__uint128_t>(s);
  if (magnitude > bound) {
    throw Error(ErrorCode::DecodeOverflow,
                "decoded magnitude exceeds the aggregation bound");
  }
  return static_cast<double>(s) /
         static_cast<double>(1ULL << codec.fraction_bits);
}

/// Wire form of a field element: decimal string, no integer-width ambiguity.
inline std::string to_decimal(FieldElement a) {
  return std::to_string(a.value());
}

inline FieldElement from_decimal(const std::string& text, const Field& field) {
  if (text.empty() || text.size() > 20 ||
      text.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::MalformedFrame, "bad field element literal");
  }
  errno = 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (errno != 0 || end != text.c_str() + text.size()) {
    throw Error(ErrorCode::MalformedFrame, "bad field element literal");
  }
  if (v >= field.modulus()) {
    throw Error(ErrorCode::MalformedFrame, "field element not reduced");
  }
  return field.element(v);
}

}  // namespace smcgate
