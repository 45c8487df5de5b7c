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

#include <random>

#include "catch_amalgamated.hpp"
#include "tcfuzz/number.hpp"

using tcfuzz::Number;

TEST_CASE("decimal literals are exact", "[number]") {
  REQUIRE(*Number::from_decimal("0.1") == Number::ratio(1, 10));
  REQUIRE(*Number::from_decimal("-2.50") == Number::ratio(-5, 2));
  REQUIRE(*Number::from_decimal("1e-6") == Number::ratio(1, 1000000));
  REQUIRE(*Number::from_decimal("3E2") == Number(300));
  REQUIRE_FALSE(Number::from_decimal("1.2.3").has_value());
  REQUIRE_FALSE(Number::from_decimal("").has_value());
  REQUIRE_FALSE(Number::from_decimal("e5").has_value());
}

TEST_CASE("rendering", "[number]") {
  REQUIRE(Number(42).to_string() == "42");
  REQUIRE(Number::ratio(1, 8).to_string() == "0.125");
  REQUIRE(Number::ratio(-3, 2).to_string() == "-1.5");
  REQUIRE(Number::ratio(1, 3).to_string() == "1/3");
  REQUIRE(Number::ratio(-1, 20).to_string() == "-0.05");
}

TEST_CASE("doubles convert exactly", "[number]") {
  REQUIRE(Number::from_double(0.5) == Number::ratio(1, 2));
  REQUIRE(Number::from_double(0.1) != Number::ratio(1, 10));
  REQUIRE(Number::from_double(0.1).to_double() == 0.1);
  REQUIRE_THROWS(Number::from_double(std::nan("")));
}

TEST_CASE("overflow promotes to big rationals", "[number]") {
  Number big = Number(int64_t{1} << 62);
  Number sq = big * big;
  mpq_class expect = mpq_class(mpz_class(1) << 124);
  REQUIRE(sq.to_mpq() == expect);
  REQUIRE_FALSE(sq.to_int64().has_value());
  REQUIRE((sq / big) == big);
  REQUIRE((sq / big).to_int64() == (int64_t{1} << 62));
}

TEST_CASE("arithmetic agrees with GMP on random operands", "[number]") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int64_t> num(-(int64_t{1} << 40), int64_t{1} << 40);
  std::uniform_int_distribution<int64_t> den(1, 1 << 20);
  for (int i = 0; i < 2000; ++i) {
    int64_t an = num(rng), ad = den(rng), bn = num(rng), bd = den(rng);
    Number a = Number::ratio(an, ad), b = Number::ratio(bn, bd);
    mpq_class qa(mpz_class(static_cast<long>(an)), mpz_class(static_cast<long>(ad)));
    mpq_class qb(mpz_class(static_cast<long>(bn)), mpz_class(static_cast<long>(bd)));
    qa.canonicalize();
    qb.canonicalize();
    REQUIRE((a + b).to_mpq() == mpq_class(qa + qb));
    REQUIRE((a - b).to_mpq() == mpq_class(qa - qb));
    REQUIRE((a * b).to_mpq() == mpq_class(qa * qb));
    if (bn != 0) REQUIRE((a / b).to_mpq() == mpq_class(qa / qb));
    REQUIRE(((a <=> b) < 0) == (qa < qb));
    REQUIRE((a == b) == (qa == qb));
  }
}

TEST_CASE("floor and ceil", "[number]") {
  REQUIRE(Number::ratio(7, 2).floor() == Number(3));
  REQUIRE(Number::ratio(7, 2).ceil() == Number(4));
  REQUIRE(Number::ratio(-7, 2).floor() == Number(-4));
  REQUIRE(Number::ratio(-7, 2).ceil() == Number(-3));
  REQUIRE_THROWS_AS(Number(1) / Number(0), std::domain_error);
}
