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

#include "dynorm/rational.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dynorm {
namespace {

using Int128 = __int128;

std::int64_t narrow_checked(Int128 value) {
  if (value > std::numeric_limits<std::int64_t>::max() ||
      value < std::numeric_limits<std::int64_t>::min()) {
    throw std::overflow_error("rational arithmetic overflow");
  }
  return static_cast<std::int64_t>(value);
}

Int128 gcd128(Int128 a, Int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::int64_t parse_int(std::string_view text, bool* ok) {
  std::int64_t value = 0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  *ok = ec == std::errc() && ptr == text.data() + text.size();
  return value;
}

}  // namespace

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) {
    throw std::invalid_argument("rational with zero denominator");
  }
  Int128 n = numerator;
  Int128 d = denominator;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  Int128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num_ = narrow_checked(n);
  den_ = narrow_checked(d);
}

Rational Rational::from_decimal(double value, double tolerance) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("cannot rationalize a non-finite value");
  }
  const std::int64_t sign = value < 0 ? -1 : 1;
  const double x = std::fabs(value);
  // Convergents p/q of the continued-fraction expansion of x.
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = x;
  for (int iter = 0; iter < 64; ++iter) {
    double whole = std::floor(frac);
    if (whole > 9.0e17) break;
    auto a = static_cast<std::int64_t>(whole);
    Int128 p2 = static_cast<Int128>(a) * p1 + p0;
    Int128 q2 = static_cast<Int128>(a) * q1 + q0;
    if (p2 > std::numeric_limits<std::int64_t>::max() ||
        q2 > std::numeric_limits<std::int64_t>::max()) {
      break;
    }
    p0 = p1;
    q0 = q1;
    p1 = static_cast<std::int64_t>(p2);
    q1 = static_cast<std::int64_t>(q2);
    if (q1 > 0 &&
        std::fabs(x - static_cast<double>(p1) / static_cast<double>(q1)) <=
            tolerance) {
      return Rational(sign * p1, q1);
    }
    double rem = frac - whole;
    if (rem < 1e-18) break;
    frac = 1.0 / rem;
  }
  if (q1 == 0) {
    throw std::invalid_argument("cannot rationalize value");
  }
  return Rational(sign * p1, q1);
}

std::optional<Rational> Rational::parse(std::string_view text) {
  auto slash = text.find('/');
  bool ok = false;
  if (slash == std::string_view::npos) {
    std::int64_t n = parse_int(text, &ok);
    if (!ok) return std::nullopt;
    return Rational(n);
  }
  std::int64_t n = parse_int(text.substr(0, slash), &ok);
  if (!ok) return std::nullopt;
  std::int64_t d = parse_int(text.substr(slash + 1), &ok);
  if (!ok || d == 0) return std::nullopt;
  return Rational(n, d);
}

double Rational::to_double() const {
  return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator-() const {
  Rational r;
  r.num_ = narrow_checked(-static_cast<Int128>(num_));
  r.den_ = den_;
  return r;
}

Rational& Rational::operator+=(const Rational& other) {
  Int128 n = static_cast<Int128>(num_) * other.den_ +
             static_cast<Int128>(other.num_) * den_;
  Int128 d = static_cast<Int128>(den_) * other.den_;
  Int128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num_ = narrow_checked(n);
  den_ = narrow_checked(d);
  return *this;
}

Rational& Rational::operator-=(const Rational& other) {
  return *this += -other;
}

Rational& Rational::operator*=(const Rational& other) {
  Int128 n = static_cast<Int128>(num_) * other.num_;
  Int128 d = static_cast<Int128>(den_) * other.den_;
  Int128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num_ = narrow_checked(n);
  den_ = narrow_checked(d);
  return *this;
}

Rational& Rational::operator/=(const Rational& other) {
  if (other.num_ == 0) {
    throw std::invalid_argument("rational division by zero");
  }
  Int128 n = static_cast<Int128>(num_) * other.den_;
  Int128 d = static_cast<Int128>(den_) * other.num_;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  Int128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num_ = narrow_checked(n);
  den_ = narrow_checked(d);
  return *this;
}

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num_) * b.den_ <
         static_cast<__int128>(b.num_) * a.den_;
}

}  // namespace dynorm
