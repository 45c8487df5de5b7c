// Copyright 2026 The tcfuzz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace tcfuzz {

// Exact rational number. Small values live in a pair of int64; results that
// overflow are promoted to a GMP rational.
class Number {
 public:
  Number() = default;
  Number(int64_t v) : num_(v), den_(1) {}  // NOLINT: implicit on purpose
  Number(int v) : num_(v), den_(1) {}      // NOLINT

  static Number from_double(double d);
  static std::optional<Number> from_decimal(std::string_view text);
  static Number from_mpq(const mpq_class& q);
  static Number ratio(int64_t num, int64_t den);

  bool is_integer() const;
  std::optional<int64_t> to_int64() const;
  double to_double() const;
  mpq_class to_mpq() const;
  int sign() const;

  // Finite decimal when the denominator is 2^a 5^b, otherwise "p/q".
  std::string to_string() const;

  Number floor() const;
  Number ceil() const;

  friend Number operator+(const Number& a, const Number& b);
  friend Number operator-(const Number& a, const Number& b);
  friend Number operator*(const Number& a, const Number& b);
  // Throws std::domain_error on a zero divisor.
  friend Number operator/(const Number& a, const Number& b);
  Number operator-() const;

  friend bool operator==(const Number& a, const Number& b);
  friend std::strong_ordering operator<=>(const Number& a, const Number& b);

  size_t hash() const;

 private:
  bool big() const { return big_ != nullptr; }
  static Number make_small(__int128 num, __int128 den);

  int64_t num_ = 0;
  int64_t den_ = 1;
  std::shared_ptr<const mpq_class> big_;
};

}  // namespace tcfuzz
