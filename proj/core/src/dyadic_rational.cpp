#include "dyadic/dyadic_rational.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dyadic {

namespace {

// Number of trailing zero bits of a nonzero BigInt.
std::int64_t trailing_zero_bits(const BigInt& v) {
  BigInt a = v < 0 ? BigInt(-v) : v;
  std::int64_t k = 0;
  while ((a & 1) == 0) {
    a >>= 1;
    ++k;
  }
  return k;
}

}  // namespace

void DyadicRational::normalize() {
  if (mantissa_ == 0) {
    exponent_ = 0;
    return;
  }
  const std::int64_t k = trailing_zero_bits(mantissa_);
  if (k > 0) {
    mantissa_ >>= static_cast<unsigned>(k);
    exponent_ += k;
  }
}

DyadicRational DyadicRational::from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("DyadicRational::from_double: non-finite input");
  if (x == 0.0) return DyadicRational();
  int exp = 0;
  const double fr = std::frexp(x, &exp);  // fr in [0.5, 1), x = fr * 2^exp
  const auto m = static_cast<long long>(std::ldexp(fr, 53));
  return DyadicRational(BigInt(m), static_cast<std::int64_t>(exp) - 53);
}

DyadicRational DyadicRational::operator+(const DyadicRational& o) const {
  if (mantissa_ == 0) return o;
  if (o.mantissa_ == 0) return *this;
  const std::int64_t e = std::min(exponent_, o.exponent_);
  BigInt a = mantissa_ << static_cast<unsigned>(exponent_ - e);
  BigInt b = o.mantissa_ << static_cast<unsigned>(o.exponent_ - e);
  return DyadicRational(a + b, e);
}

BigInt DyadicRational::floor_div_pow2(std::int64_t k) const {
  if (mantissa_ == 0) return BigInt(0);
  const std::int64_t shift = exponent_ - k;
  if (shift >= 0) return mantissa_ << static_cast<unsigned>(shift);
  // floor division by 2^-shift; cpp_int division truncates toward zero.
  const BigInt d = BigInt(1) << static_cast<unsigned>(-shift);
  BigInt q = mantissa_ / d;
  if (mantissa_ < 0 && q * d != mantissa_) q -= 1;
  return q;
}

DyadicRational DyadicRational::mod_pow2(std::int64_t k) const {
  const BigInt q = floor_div_pow2(k);
  return *this - DyadicRational(q, k);
}

std::strong_ordering DyadicRational::operator<=>(const DyadicRational& o) const {
  const DyadicRational d = *this - o;
  if (d.mantissa_ < 0) return std::strong_ordering::less;
  if (d.mantissa_ > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

double DyadicRational::to_double() const {
  if (mantissa_ == 0) return 0.0;
  // Round the mantissa to at most 64 bits, then scale.
  BigInt m = mantissa_;
  std::int64_t e = exponent_;
  const std::int64_t bits = static_cast<std::int64_t>(msb(BigInt(m < 0 ? -m : m))) + 1;
  if (bits > 63) {
    m >>= static_cast<unsigned>(bits - 63);
    e += bits - 63;
  }
  return std::ldexp(static_cast<double>(m.convert_to<long long>()), static_cast<int>(e));
}

std::string DyadicRational::to_string() const {
  return mantissa_.str() + "*2^" + std::to_string(exponent_);
}

DyadicRational DyadicRational::parse(const std::string& text) {
  const auto bad = [&] { return std::invalid_argument("DyadicRational::parse: bad literal '" + text + "'"); };
  if (text.empty()) throw bad();
  try {
    if (auto p = text.find("*2^"); p != std::string::npos) {
      BigInt m(text.substr(0, p));
      const std::int64_t e = std::stoll(text.substr(p + 3));
      return DyadicRational(m, e);
    }
    if (auto p = text.find("/2^"); p != std::string::npos) {
      BigInt num(text.substr(0, p));
      const std::int64_t q = std::stoll(text.substr(p + 3));
      return DyadicRational(num, -q);
    }
    return DyadicRational(BigInt(text), 0);
  } catch (const std::exception&) {
    throw bad();
  }
}

}  // namespace dyadic
