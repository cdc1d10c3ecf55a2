#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "impactlab/types.hpp"

using namespace impactlab;

TEST_CASE("ratio normalizes sign and gcd") {
  const Ratio r = Ratio::of(-4, 2000);
  CHECK(r.num == -1);
  CHECK(r.den == 500);
  CHECK(Ratio::of(9, -2000) == Ratio::of(-9, 2000));
  CHECK(Ratio::of(0, 123) == Ratio::of(0, 7));
  CHECK(Ratio::of(-9, 2000).value() == doctest::Approx(-0.0045));
  CHECK_THROWS_AS(Ratio::of(1, 0), std::invalid_argument);
}

TEST_CASE("timestamp round trip and ordering") {
  const Timestamp t = parse_timestamp("2003-06-02T09:31:05");
  CHECK(t.year == 2003);
  CHECK(t.month == 6);
  CHECK(t.day == 2);
  CHECK(t.sec_of_day == hms_to_sec(9, 31, 5));
  CHECK(format_timestamp(t) == "2003-06-02T09:31:05");
  CHECK(parse_timestamp("2003-06-02T09:31:04") < t);
  CHECK(parse_timestamp("2003-06-03T00:00:00") > t);

  CHECK_THROWS_AS(parse_timestamp("2003-06-02 09:31:05"), std::invalid_argument);
  CHECK_THROWS_AS(parse_timestamp("2003-13-02T09:31:05"), std::invalid_argument);
  CHECK_THROWS_AS(parse_timestamp("garbage"), std::invalid_argument);
}

TEST_CASE("decimal parse and format") {
  const Decimal d = Decimal::parse("9.99");
  CHECK(d.mantissa == 999);
  CHECK(d.exponent == -2);
  CHECK(d.str() == "9.99");
  CHECK(Decimal::parse("500").str() == "500");
  CHECK(Decimal::parse("0.05").str() == "0.05");
  CHECK(Decimal::parse("0.05").value() == doctest::Approx(0.05));
  CHECK_THROWS_AS(Decimal::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(Decimal::parse("9.9.9"), std::invalid_argument);
  CHECK_THROWS_AS(Decimal::parse("abc"), std::invalid_argument);
}

TEST_CASE("price to ticks is exact") {
  const Decimal tick{1, -2};  // 0.01
  CHECK(price_to_ticks(Decimal::parse("9.99"), tick) == 999);
  CHECK(price_to_ticks(Decimal::parse("10"), tick) == 1000);
  CHECK(price_to_ticks(Decimal::parse("10.00"), tick) == 1000);

  const Decimal half_cent{5, -3};  // 0.005
  CHECK(price_to_ticks(Decimal::parse("9.975"), half_cent) == 1995);

  // Off-grid prices are an error, never rounded.
  CHECK_THROWS_AS(price_to_ticks(Decimal::parse("9.975"), tick), std::invalid_argument);

  CHECK(ticks_to_price_string(999, tick) == "9.99");
  CHECK(ticks_to_price_string(1995, half_cent) == "9.975");
  CHECK(ticks_to_price_string(5, tick) == "0.05");
}

TEST_CASE("trade type strings") {
  for (const TradeType t : {TradeType::PB, TradeType::PS, TradeType::FB, TradeType::FS})
    CHECK(trade_type_from_string(to_string(t)) == t);
  CHECK(!trade_type_from_string("XX").has_value());
  CHECK(is_partial(TradeType::PB));
  CHECK(!is_partial(TradeType::FS));
  CHECK(is_buy(TradeType::FB));
  CHECK(!is_buy(TradeType::PS));
}
