#include "doctest.h"

#include "boxcouple/errors.hpp"
#include "boxcouple/rational.hpp"

using boxcouple::Rational;

TEST_CASE("decimal parsing is exact") {
  CHECK(Rational::parse("0.5") == Rational(1, 2));
  CHECK(Rational::parse("-1.25") == Rational(-5, 4));
  CHECK(Rational::parse("3") == Rational(3));
  CHECK_THROWS_AS(Rational::parse("1.2.3"), boxcouple::ValidationError);
  CHECK_THROWS_AS(Rational::parse(""), boxcouple::ValidationError);
}

TEST_CASE("arithmetic normalizes") {
  Rational a(2, 4);
  CHECK(a.num() == 1);
  CHECK(a.den() == 2);
  CHECK(a + Rational(1, 3) == Rational(5, 6));
  CHECK(a * Rational(-4) == Rational(-2));
  CHECK(Rational(7, 2).ceil() == 4);
  CHECK(Rational(-7, 2).ceil() == -3);
  CHECK(Rational(-7, 2).floor() == -4);
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(boxcouple::compare(Rational(1, 2), 0.5) == 0);
  CHECK(boxcouple::compare(Rational(3), 2.0) == 1);
}

TEST_CASE("decimal formatting round-trips") {
  for (const char* text : {"0.5", "-1.25", "3", "0", "0.0625", "-0.2", "12.75"}) {
    auto r = Rational::parse(text);
    CHECK(Rational::parse(r.to_decimal()) == r);
  }
  CHECK(Rational(1, 8).to_decimal() == "0.125");
  CHECK(Rational(-1, 20).to_decimal() == "-0.05");
  CHECK_THROWS_AS(Rational(1, 3).to_decimal(), boxcouple::ValidationError);
}
