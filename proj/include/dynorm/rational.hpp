// Copyright 2026 The dynorm Authors.
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

#ifndef DYNORM_RATIONAL_HPP_
#define DYNORM_RATIONAL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dynorm {

// Exact rational number over int64. Always stored in lowest terms with a
// positive denominator. Arithmetic goes through 128-bit intermediates and
// throws std::overflow_error if a reduced result no longer fits in int64.
class Rational {
 public:
  constexpr Rational() : num_(0), den_(1) {}
  constexpr Rational(std::int64_t integer) : num_(integer), den_(1) {}
  Rational(std::int64_t numerator, std::int64_t denominator);

  // Smallest-denominator rational within `tolerance` of `value`, found by
  // continued-fraction expansion. Exact for representable integers.
  static Rational from_decimal(double value, double tolerance = 1e-9);

  // Accepts "p/q" and plain integers ("3", "-7"). Nullopt on anything else.
  static std::optional<Rational> parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }
  double to_double() const;

  // "p/q" in lowest terms, or just "p" when the denominator is 1.
  std::string to_string() const;

  Rational operator-() const;
  Rational& operator+=(const Rational& other);
  Rational& operator-=(const Rational& other);
  Rational& operator*=(const Rational& other);
  Rational& operator/=(const Rational& other);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) {
    return !(a == b);
  }
  friend bool operator<(const Rational& a, const Rational& b);
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return !(b < a);
  }
  friend bool operator>=(const Rational& a, const Rational& b) {
    return !(a < b);
  }

 private:
  std::int64_t num_;
  std::int64_t den_;
};

}  // namespace dynorm

#endif  // DYNORM_RATIONAL_HPP_
