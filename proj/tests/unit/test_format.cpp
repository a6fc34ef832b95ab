#include <doctest.h>

#include <cmath>
#include <random>

#include "wattbench/core/error.hpp"
#include "wattbench/core/format.hpp"

using namespace wattbench;

TEST_CASE("fmt_shortest round-trips") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-30, 30);
  for (int i = 0; i < 2000; i++) {
    const double v = mant(rng) * std::pow(10.0, expo(rng));
    CHECK(parse_double(fmt_shortest(v)) == v);
  }
  CHECK(fmt_shortest(0.0) == "0");
  CHECK(fmt_shortest(1.0) == "1");
  CHECK(fmt_shortest(0.1) == "0.1");
}

TEST_CASE("fmt_sig renders decimal, trims zeros, never scientific") {
  CHECK(fmt_sig(2.0) == "2");
  CHECK(fmt_sig(0.035) == "0.035");
  CHECK(fmt_sig(1234567.0) == "1234570");
  CHECK(fmt_sig(0.23076923076923078) == "0.230769");
  CHECK(fmt_sig(123.456789) == "123.457");
  CHECK(fmt_sig(-0.5) == "-0.5");
  CHECK(fmt_sig(1e-7) == "0.0000001");
  CHECK(fmt_sig(1e9) == "1000000000");
  CHECK(fmt_sig(0.0) == "0");
  CHECK(fmt_sig(999999.5) == "1000000");
  for (double v : {3.14159265, 1e-6, 123456.789, 9.999999e5}) {
    const auto s = fmt_sig(v);
    CHECK(s.find('e') == std::string::npos);
    CHECK(s.find('E') == std::string::npos);
    // Within 6 significant digits of the input.
    CHECK(std::abs(parse_double(s) - v) <= 1e-5 * std::abs(v));
  }
}

TEST_CASE("fmt_fixed") {
  CHECK(fmt_fixed(1.005, 2) == "1.00");  // nearest-even at binary repr
  CHECK(fmt_fixed(2.5, 1) == "2.5");
  CHECK(fmt_fixed(3.0, 3) == "3.000");
}

TEST_CASE("strict parses reject junk") {
  CHECK(parse_double("1.5") == 1.5);
  CHECK(parse_double("-2e3") == -2000.0);
  CHECK_THROWS_AS(parse_double("1.5x"), DataError);
  CHECK_THROWS_AS(parse_double(""), DataError);
  CHECK_THROWS_AS(parse_double(" 1"), DataError);
  CHECK(parse_int("42") == 42);
  CHECK(parse_int("-7") == -7);
  CHECK_THROWS_AS(parse_int("4.2"), DataError);
  CHECK_THROWS_AS(parse_int("x"), DataError);
}
