// Exact arithmetic on numbers of the form mantissa * 2^exponent.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <string>

namespace dyadic {

using BigInt = boost::multiprecision::cpp_int;

// A dyadic rational m * 2^e with arbitrary-precision mantissa.
// Canonical form: the mantissa is odd or zero, and zero carries exponent 0.
// All arithmetic is exact.
class DyadicRational {
 public:
  DyadicRational() : mantissa_(0), exponent_(0) {}
  DyadicRational(long long v) : mantissa_(v), exponent_(0) { normalize(); }
  DyadicRational(BigInt mantissa, std::int64_t exponent)
      : mantissa_(std::move(mantissa)), exponent_(exponent) {
    normalize();
  }

  static DyadicRational pow2(std::int64_t e) { return DyadicRational(BigInt(1), e); }
  // Exact conversion; throws std::invalid_argument on NaN/Inf.
  static DyadicRational from_double(double x);

  const BigInt& mantissa() const { return mantissa_; }
  std::int64_t exponent() const { return exponent_; }

  bool is_zero() const { return mantissa_ == 0; }
  bool is_negative() const { return mantissa_ < 0; }
  bool is_integer() const { return exponent_ >= 0; }

  DyadicRational operator-() const { return DyadicRational(-mantissa_, exponent_); }
  DyadicRational operator+(const DyadicRational& o) const;
  DyadicRational operator-(const DyadicRational& o) const { return *this + (-o); }
  DyadicRational operator*(const DyadicRational& o) const {
    return DyadicRational(mantissa_ * o.mantissa_, exponent_ + o.exponent_);
  }

  // Value scaled by 2^k, exact.
  DyadicRational mul_pow2(std::int64_t k) const {
    if (mantissa_ == 0) return DyadicRational();
    return DyadicRational(mantissa_, exponent_ + k);
  }

  // floor(value / 2^k) as an integer.
  BigInt floor_div_pow2(std::int64_t k) const;
  // value - floor(value / 2^k) * 2^k, the representative in [0, 2^k).
  DyadicRational mod_pow2(std::int64_t k) const;

  int sign() const { return mantissa_ == 0 ? 0 : (mantissa_ < 0 ? -1 : 1); }
  std::strong_ordering operator<=>(const DyadicRational& o) const;
  bool operator==(const DyadicRational& o) const {
    return mantissa_ == o.mantissa_ && exponent_ == o.exponent_;
  }

  double to_double() const;

  // Serialized as "m*2^e", e.g. "3*2^-2". parse() also accepts "p/2^q"
  // and plain integers.
  std::string to_string() const;
  static DyadicRational parse(const std::string& text);

 private:
  void normalize();

  BigInt mantissa_;
  std::int64_t exponent_;
};

inline DyadicRational abs(const DyadicRational& x) { return x.is_negative() ? -x : x; }

}  // namespace dyadic
