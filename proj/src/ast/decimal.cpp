#include "cadscript/decimal.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <ios>

#include <boost/math/constants/constants.hpp>

namespace cadscript {

namespace {

Decimal::Backend normalize_zero(Decimal::Backend v) {
  if (v.is_zero()) return Decimal::Backend(0);
  return v;
}

}  // namespace

Decimal::Decimal(Backend value) : value_(normalize_zero(std::move(value))) {}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  if (i < text.size() && text[i] == '-') ++i;
  std::size_t int_digits = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    ++i;
    ++int_digits;
  }
  if (int_digits == 0) return std::nullopt;
  if (i < text.size() && text[i] == '.') {
    ++i;
    std::size_t frac_digits = 0;
    while (i < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      ++frac_digits;
    }
    if (frac_digits == 0) return std::nullopt;
  }
  if (i != text.size()) return std::nullopt;
  return Decimal(Backend(std::string(text)));
}

Decimal Decimal::from_double(double value) {
  // 17 significant digits reproduce the binary value exactly.
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return Decimal(Backend(buf));
}

Decimal Decimal::pi() {
  static const Backend kPi = boost::math::constants::pi<Backend>();
  return Decimal(kPi);
}

double Decimal::to_double() const { return value_.convert_to<double>(); }

bool Decimal::is_finite() const {
  return !(boost::multiprecision::isinf)(value_) &&
         !(boost::multiprecision::isnan)(value_);
}

Decimal Decimal::rounded(int decimals) const {
  Backend scale = boost::multiprecision::pow(Backend(10), decimals);
  Backend scaled = boost::multiprecision::abs(value_) * scale;
  Backend r = boost::multiprecision::trunc(scaled + Backend("0.5")) / scale;
  if (value_.sign() < 0) r = -r;
  return Decimal(r);
}

std::string Decimal::to_fixed(int decimals) const {
  Decimal r = rounded(decimals);
  std::string s = r.value_.str(decimals, std::ios_base::fixed);
  if (s == "-0" || s.rfind("-0.", 0) == 0) {
    bool all_zero = true;
    for (char c : s) {
      if (c != '-' && c != '0' && c != '.') all_zero = false;
    }
    if (all_zero) s.erase(0, 1);
  }
  return s;
}

std::string Decimal::to_string() const {
  std::string s = to_fixed(30);
  if (s.find('.') != std::string::npos) {
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

Decimal Decimal::abs() const { return Decimal(boost::multiprecision::abs(value_)); }

Decimal Decimal::sqrt() const {
  return Decimal(boost::multiprecision::sqrt(value_));
}

Decimal Decimal::cos_deg() const {
  return Decimal(boost::multiprecision::cos(value_ * pi().value_ / 180));
}

Decimal Decimal::sin_deg() const {
  return Decimal(boost::multiprecision::sin(value_ * pi().value_ / 180));
}

Decimal operator+(const Decimal& a, const Decimal& b) {
  return Decimal(a.value_ + b.value_);
}
Decimal operator-(const Decimal& a, const Decimal& b) {
  return Decimal(a.value_ - b.value_);
}
Decimal operator*(const Decimal& a, const Decimal& b) {
  return Decimal(a.value_ * b.value_);
}
Decimal operator/(const Decimal& a, const Decimal& b) {
  return Decimal(a.value_ / b.value_);
}
Decimal Decimal::operator-() const { return Decimal(-value_); }

}  // namespace cadscript
