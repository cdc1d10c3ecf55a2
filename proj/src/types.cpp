#include "impactlab/types.hpp"

#include <charconv>
#include <cstdlib>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace impactlab {

const char* to_string(TradeType t) {
  switch (t) {
    case TradeType::PB: return "PB";
    case TradeType::PS: return "PS";
    case TradeType::FB: return "FB";
    case TradeType::FS: return "FS";
  }
  return "??";
}

std::optional<TradeType> trade_type_from_string(std::string_view s) {
  if (s == "PB") return TradeType::PB;
  if (s == "PS") return TradeType::PS;
  if (s == "FB") return TradeType::FB;
  if (s == "FS") return TradeType::FS;
  return std::nullopt;
}

namespace {

int parse_int_field(std::string_view s, const char* what) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument(std::string("bad ") + what + " in timestamp");
  return out;
}

}  // namespace

Timestamp parse_timestamp(std::string_view s) {
  // Fixed layout: YYYY-MM-DDTHH:MM:SS
  if (s.size() != 19 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
      s[16] != ':')
    throw std::invalid_argument("timestamp must be YYYY-MM-DDTHH:MM:SS");
  Timestamp t;
  t.year = parse_int_field(s.substr(0, 4), "year");
  t.month = parse_int_field(s.substr(5, 2), "month");
  t.day = parse_int_field(s.substr(8, 2), "day");
  const int h = parse_int_field(s.substr(11, 2), "hour");
  const int m = parse_int_field(s.substr(14, 2), "minute");
  const int sec = parse_int_field(s.substr(17, 2), "second");
  if (t.month < 1 || t.month > 12 || t.day < 1 || t.day > 31 || h > 23 || m > 59 || sec > 59)
    throw std::invalid_argument("timestamp field out of range");
  t.sec_of_day = hms_to_sec(h, m, sec);
  return t;
}

std::string format_timestamp(const Timestamp& t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", t.year, t.month, t.day,
                t.sec_of_day / 3600, (t.sec_of_day / 60) % 60, t.sec_of_day % 60);
  return std::string(buf);
}

Decimal Decimal::parse(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty decimal");
  bool negative = false;
  std::size_t i = 0;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    i = 1;
  }
  std::int64_t mantissa = 0;
  int exponent = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.') {
      if (seen_point) throw std::invalid_argument("bad decimal: " + std::string(s));
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') throw std::invalid_argument("bad decimal: " + std::string(s));
    if (mantissa > (INT64_MAX - 9) / 10) throw std::invalid_argument("decimal overflow");
    mantissa = mantissa * 10 + (c - '0');
    seen_digit = true;
    if (seen_point) --exponent;
  }
  if (!seen_digit) throw std::invalid_argument("bad decimal: " + std::string(s));
  return Decimal{negative ? -mantissa : mantissa, exponent};
}

std::string Decimal::str() const {
  std::int64_t m = mantissa;
  std::string sign;
  if (m < 0) {
    sign = "-";
    m = -m;
  }
  std::string digits = std::to_string(m);
  if (exponent >= 0) {
    digits.append(static_cast<std::size_t>(exponent), '0');
    return sign + digits;
  }
  const std::size_t frac = static_cast<std::size_t>(-exponent);
  if (digits.size() <= frac) digits.insert(0, frac - digits.size() + 1, '0');
  digits.insert(digits.size() - frac, ".");
  return sign + digits;
}

double Decimal::value() const {
  double v = static_cast<double>(mantissa);
  for (int i = 0; i < exponent; ++i) v *= 10.0;
  for (int i = 0; i > exponent; --i) v /= 10.0;
  return v;
}

namespace {

std::int64_t checked_pow10_mul(std::int64_t v, int exp10) {
  for (int i = 0; i < exp10; ++i) {
    if (v > INT64_MAX / 10 || v < INT64_MIN / 10) throw std::overflow_error("price overflow");
    v *= 10;
  }
  return v;
}

}  // namespace

Tick price_to_ticks(const Decimal& price, const Decimal& tick_size) {
  if (tick_size.mantissa <= 0) throw std::invalid_argument("tick size must be positive");
  // price / tick = (pm / tm) * 10^(pe - te)
  std::int64_t num = price.mantissa;
  std::int64_t den = tick_size.mantissa;
  const int shift = price.exponent - tick_size.exponent;
  if (shift >= 0) {
    num = checked_pow10_mul(num, shift);
  } else {
    den = checked_pow10_mul(den, -shift);
  }
  if (num % den != 0)
    throw std::invalid_argument("price " + price.str() + " is off the tick grid (tick " +
                                tick_size.str() + ")");
  return num / den;
}

std::string ticks_to_price_string(Tick ticks, const Decimal& tick_size) {
  std::int64_t m = ticks;
  if (m != 0 && tick_size.mantissa != 0 &&
      (m > INT64_MAX / tick_size.mantissa || m < INT64_MIN / tick_size.mantissa))
    throw std::overflow_error("price overflow");
  return Decimal{ticks * tick_size.mantissa, tick_size.exponent}.str();
}

int effective_threads() {
#ifdef _OPENMP
  int n = omp_get_max_threads();
#else
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
#endif
  if (const char* cap = std::getenv("IMPACTLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(cap, &end, 10);
    if (end != cap && v > 0 && v < n) n = static_cast<int>(v);
  }
  return n;
}

}  // namespace impactlab
