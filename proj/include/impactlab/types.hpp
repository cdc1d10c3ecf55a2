#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace impactlab {

// Prices live on an integer tick grid, volumes on integer share counts.
// All book arithmetic is exact; floating point appears only when a
// dimensionless quantity is handed to the statistics layer.
using Tick = std::int64_t;
using Units = std::int64_t;
using OrderId = std::uint64_t;
using Seq = std::uint64_t;

enum class Side : std::uint8_t { buy, sell };

inline Side opposite(Side s) { return s == Side::buy ? Side::sell : Side::buy; }

// Four-way trade typology: buyer/seller initiated x partially/fully filled.
enum class TradeType : std::uint8_t { PB = 0, PS = 1, FB = 2, FS = 3 };

inline constexpr int kTradeTypes = 4;

const char* to_string(TradeType t);
std::optional<TradeType> trade_type_from_string(std::string_view s);

inline bool is_buy(TradeType t) { return t == TradeType::PB || t == TradeType::FB; }
inline bool is_partial(TradeType t) { return t == TradeType::PB || t == TradeType::PS; }

// Exact rational used for mid-quote returns: tick units cancel, so the
// numerator and denominator stay in int64 range for any sane book.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Ratio of(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::invalid_argument("Ratio: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    return Ratio{num, den};
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_zero() const { return num == 0; }
  bool operator==(const Ratio& o) const = default;
};

// Calendar timestamp with one-second resolution, as carried by the feed.
struct Timestamp {
  int year = 1970;
  int month = 1;
  int day = 1;
  int sec_of_day = 0;  // seconds since local midnight

  auto operator<=>(const Timestamp&) const = default;
  bool same_day(const Timestamp& o) const {
    return year == o.year && month == o.month && day == o.day;
  }
};

// Parses "YYYY-MM-DDTHH:MM:SS"; throws std::invalid_argument on malformed input.
Timestamp parse_timestamp(std::string_view s);
std::string format_timestamp(const Timestamp& t);

inline int hms_to_sec(int h, int m, int s) { return h * 3600 + m * 60 + s; }

// A decimal number m * 10^e, used for feed prices and tick sizes so that
// "9.99" stays exact end to end.
struct Decimal {
  std::int64_t mantissa = 0;
  int exponent = 0;

  static Decimal parse(std::string_view s);
  std::string str() const;
  double value() const;
  bool operator==(const Decimal&) const = default;
};

// Converts a decimal price to ticks. Throws if the price does not sit on the
// tick grid or the intermediate arithmetic would overflow.
Tick price_to_ticks(const Decimal& price, const Decimal& tick_size);
std::string ticks_to_price_string(Tick ticks, const Decimal& tick_size);

struct InstrumentConfig {
  Decimal tick_size{1, -2};  // 0.01 currency units unless configured
  Units lot_size = 1;
};

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

struct ParseError : std::runtime_error {
  ParseError(std::size_t line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
        line_no(line_no) {}
  std::size_t line_no;
};

struct StreamError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SessionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when the scaled design matrix is rank deficient within machine
// precision; names the columns that pivoted past the numerical rank.
struct RankDeficiencyError : std::runtime_error {
  RankDeficiencyError(std::string what, std::vector<std::string> cols)
      : std::runtime_error(std::move(what)), columns(std::move(cols)) {}
  std::vector<std::string> columns;
};

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Effective worker count for parallel kernels: hardware threads clamped by
// the IMPACTLAB_THREADS environment variable when set.
int effective_threads();

}  // namespace impactlab
