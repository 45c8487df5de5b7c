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

#include "tcfuzz/number.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace tcfuzz {
namespace {

using i128 = __int128;

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits64(i128 v) {
  return v >= std::numeric_limits<int64_t>::min() &&
         v <= std::numeric_limits<int64_t>::max();
}

mpz_class mpz_from_i128(i128 v) {
  bool neg = v < 0;
  unsigned __int128 u = neg ? -(unsigned __int128)v : (unsigned __int128)v;
  mpz_class hi = static_cast<unsigned long>(u >> 64);
  mpz_class lo = static_cast<unsigned long>(u & 0xFFFFFFFFFFFFFFFFULL);
  mpz_class r = (hi << 64) + lo;
  return neg ? mpz_class(-r) : r;
}

bool mpz_fits64(const mpz_class& z) { return mpz_fits_slong_p(z.get_mpz_t()) != 0; }

}  // namespace

Number Number::make_small(i128 num, i128 den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  Number r;
  if (fits64(num) && fits64(den)) {
    r.num_ = static_cast<int64_t>(num);
    r.den_ = static_cast<int64_t>(den);
    return r;
  }
  mpq_class q(mpz_from_i128(num), mpz_from_i128(den));
  q.canonicalize();
  r.big_ = std::make_shared<const mpq_class>(std::move(q));
  return r;
}

Number Number::ratio(int64_t num, int64_t den) {
  if (den == 0) throw std::domain_error("zero denominator");
  return make_small(num, den);
}

Number Number::from_mpq(const mpq_class& q_in) {
  mpq_class q = q_in;
  q.canonicalize();
  Number r;
  if (mpz_fits64(q.get_num()) && mpz_fits64(q.get_den())) {
    r.num_ = q.get_num().get_si();
    r.den_ = q.get_den().get_si();
    return r;
  }
  r.big_ = std::make_shared<const mpq_class>(std::move(q));
  return r;
}

Number Number::from_double(double d) {
  if (!std::isfinite(d)) throw std::domain_error("non-finite value has no exact rational");
  mpq_class q(d);  // exact for IEEE doubles
  return from_mpq(q);
}

std::optional<Number> Number::from_decimal(std::string_view text) {
  size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    neg = text[i] == '-';
    ++i;
  }
  std::string digits;
  size_t frac = 0;
  bool any = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    digits += text[i++];
    any = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      digits += text[i++];
      ++frac;
      any = true;
    }
  }
  if (!any) return std::nullopt;
  long exp = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
      eneg = text[i] == '-';
      ++i;
    }
    if (i >= text.size()) return std::nullopt;
    long e = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      e = e * 10 + (text[i++] - '0');
      if (e > 4000) return std::nullopt;
    }
    exp = eneg ? -e : e;
  }
  if (i != text.size()) return std::nullopt;
  mpz_class num(digits, 10);
  if (neg) num = -num;
  long scale = exp - static_cast<long>(frac);
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  mpq_class q = scale < 0 ? mpq_class(num, p) : mpq_class(num * p);
  return from_mpq(q);
}

mpq_class Number::to_mpq() const {
  if (big()) return *big_;
  return mpq_class(mpz_class(static_cast<long>(num_)), mpz_class(static_cast<long>(den_)));
}

bool Number::is_integer() const {
  if (big()) return big_->get_den() == 1;
  return den_ == 1;
}

std::optional<int64_t> Number::to_int64() const {
  if (!is_integer()) return std::nullopt;
  if (big()) {
    if (!mpz_fits64(big_->get_num())) return std::nullopt;
    return big_->get_num().get_si();
  }
  return num_;
}

double Number::to_double() const {
  if (big()) return big_->get_d();
  if (den_ == 1) return static_cast<double>(num_);
  return to_mpq().get_d();
}

int Number::sign() const {
  if (big()) return sgn(*big_);
  return (num_ > 0) - (num_ < 0);
}

std::string Number::to_string() const {
  mpq_class q = to_mpq();
  mpz_class den = q.get_den();
  if (den == 1) return q.get_num().get_str();
  unsigned long twos = 0, fives = 0;
  mpz_class d = den;
  while (mpz_divisible_ui_p(d.get_mpz_t(), 2)) { d /= 2; ++twos; }
  while (mpz_divisible_ui_p(d.get_mpz_t(), 5)) { d /= 5; ++fives; }
  if (d != 1) return q.get_num().get_str() + "/" + den.get_str();
  unsigned long k = std::max(twos, fives);
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, k);
  mpz_class scaled = q.get_num() * p / den;
  bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  std::string s = scaled.get_str();
  if (s.size() <= k) s = std::string(k - s.size() + 1, '0') + s;
  s.insert(s.size() - k, ".");
  return neg ? "-" + s : s;
}

Number Number::floor() const {
  if (is_integer()) return *this;
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), to_mpq().get_num().get_mpz_t(), to_mpq().get_den().get_mpz_t());
  return from_mpq(mpq_class(f));
}

Number Number::ceil() const {
  if (is_integer()) return *this;
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), to_mpq().get_num().get_mpz_t(), to_mpq().get_den().get_mpz_t());
  return from_mpq(mpq_class(c));
}

Number operator+(const Number& a, const Number& b) {
  if (!a.big() && !b.big()) {
    return Number::make_small(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                              static_cast<i128>(a.den_) * b.den_);
  }
  return Number::from_mpq(a.to_mpq() + b.to_mpq());
}

Number operator-(const Number& a, const Number& b) {
  if (!a.big() && !b.big()) {
    return Number::make_small(static_cast<i128>(a.num_) * b.den_ - static_cast<i128>(b.num_) * a.den_,
                              static_cast<i128>(a.den_) * b.den_);
  }
  return Number::from_mpq(a.to_mpq() - b.to_mpq());
}

Number operator*(const Number& a, const Number& b) {
  if (!a.big() && !b.big()) {
    return Number::make_small(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
  }
  return Number::from_mpq(a.to_mpq() * b.to_mpq());
}

Number operator/(const Number& a, const Number& b) {
  if (b.sign() == 0) throw std::domain_error("division by zero");
  if (!a.big() && !b.big()) {
    return Number::make_small(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
  }
  return Number::from_mpq(a.to_mpq() / b.to_mpq());
}

Number Number::operator-() const {
  if (!big()) return make_small(-static_cast<i128>(num_), den_);
  return from_mpq(-*big_);
}

bool operator==(const Number& a, const Number& b) {
  if (!a.big() && !b.big()) return a.num_ == b.num_ && a.den_ == b.den_;
  return a.to_mpq() == b.to_mpq();
}

std::strong_ordering operator<=>(const Number& a, const Number& b) {
  int c;
  if (!a.big() && !b.big()) {
    i128 l = static_cast<i128>(a.num_) * b.den_;
    i128 r = static_cast<i128>(b.num_) * a.den_;
    c = (l > r) - (l < r);
  } else {
    c = cmp(a.to_mpq(), b.to_mpq());
  }
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

size_t Number::hash() const {
  if (!big()) return std::hash<int64_t>()(num_) * 31 + std::hash<int64_t>()(den_);
  return std::hash<std::string>()(big_->get_str());
}

}  // namespace tcfuzz
