#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace cadscript {

// Base-10 number with 50 significant digits. Parsed literals, sums and
// products of literals are exact; quotients and transcendental values carry
// the full working precision until a rounding pass truncates them.
class Decimal {
 public:
  using Backend = boost::multiprecision::number<
      boost::multiprecision::cpp_dec_float<50>, boost::multiprecision::et_off>;

  Decimal() = default;
  Decimal(int value) : value_(value) {}  // NOLINT(google-explicit-constructor)
  explicit Decimal(Backend value);

  // Accepts `-?digits(.digits)?`; returns nullopt for anything else.
  static std::optional<Decimal> parse(std::string_view text);
  static Decimal from_double(double value);
  static Decimal pi();

  double to_double() const;

  // Plain decimal notation, no exponent, trailing zeros stripped, at most
  // 30 fractional digits.
  std::string to_string() const;

  // Rounds half away from zero, then prints exactly `decimals` digits.
  std::string to_fixed(int decimals) const;

  Decimal rounded(int decimals) const;

  bool is_zero() const { return value_.is_zero(); }
  bool is_negative() const { return value_.sign() < 0; }
  bool is_finite() const;

  Decimal abs() const;
  Decimal sqrt() const;
  // Trigonometry on an angle given in degrees.
  Decimal cos_deg() const;
  Decimal sin_deg() const;

  const Backend& backend() const { return value_; }

  friend Decimal operator+(const Decimal& a, const Decimal& b);
  friend Decimal operator-(const Decimal& a, const Decimal& b);
  friend Decimal operator*(const Decimal& a, const Decimal& b);
  // Caller checks for a zero divisor; division by zero yields a non-finite
  // value.
  friend Decimal operator/(const Decimal& a, const Decimal& b);
  Decimal operator-() const;

  friend bool operator==(const Decimal& a, const Decimal& b) {
    return a.value_ == b.value_;
  }
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (a.value_ > b.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  Backend value_{0};
};

}  // namespace cadscript
