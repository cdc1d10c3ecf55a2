#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "impactlab/trades.hpp"
#include "impactlab/types.hpp"

namespace impactlab {

inline constexpr int kIntradayBuckets = 24;  // ten-minute bins over both sessions

// Ten-minute intraday bin: 0..11 morning, 12..23 afternoon. Bucket 0 is the
// regression baseline (its dummy is never emitted). Throws SessionError for
// timestamps outside continuous trading.
int intraday_bucket(const Timestamp& t);

// How the spread and gap regressors are expressed. `relative` divides price
// differences by (a1 + b1), making every regressor dimensionless and
// cross-sectionally poolable; `raw` keeps currency units for fidelity
// experiments against feeds with a known tick value.
enum class SpreadMode : std::uint8_t { relative, raw };

const char* to_string(SpreadMode m);

// Pre-normalization regressor row read off one trade's pre-event snapshot.
struct RawObservation {
  TradeType type = TradeType::FS;
  Units omega = 0;
  double r = 0.0;
  double spread = 0.0;
  std::vector<Units> ask_depth, bid_depth;  // V^A_i, V^B_i, i = 1..L
  std::vector<double> ask_gap, bid_gap;     // G^A_i, G^B_i in spread-mode units
  int bucket = 0;
};

// One normalized regression row. After size aggregation `bucket` is -1 and
// `bucket_share` holds the group's bucket frequencies; `weight` the group
// size.
struct ImpactObservation {
  std::int64_t omega_raw = 0;
  double r_norm = 0.0;
  double omega_norm = 0.0;
  double spread = 0.0;
  std::vector<double> ask_depth, bid_depth;  // V / <omega>
  std::vector<double> ask_gap, bid_gap;      // g / |<r>|
  int bucket = -1;
  std::array<double, kIntradayBuckets> bucket_share{};
  double weight = 1.0;
};

// Reads the L-level regressor set off the pre-trade snapshot. Needs L+1
// stored levels per side (the L-th gap spans levels L and L+1); returns
// false and leaves `out` untouched when the book is too thin.
bool extract(const TradeRecord& trade, int levels, SpreadMode mode, const InstrumentConfig& cfg,
             RawObservation& out);

// Per-type normalization constants taken from a stats pass.
struct Normalizer {
  explicit Normalizer(const StockStats& stats) : stats_(&stats) {}

  // False when the trade's type has no trades or a zero mean return.
  bool usable(TradeType t) const;
  ImpactObservation normalize(const RawObservation& raw) const;

  double mean_omega(TradeType t) const { return stats_->of(t).mean_omega; }
  double mean_r(TradeType t) const { return stats_->of(t).mean_r; }

 private:
  const StockStats* stats_;
};

struct FeatureCounters {
  std::size_t thin_book_skips = 0;
  std::size_t excluded_types = 0;  // rows dropped because <r> was 0 or absent
};

// Observation rows for one instrument x trade type.
struct FeatureTable {
  std::string instrument;
  TradeType type = TradeType::FS;
  int levels = 0;
  SpreadMode mode = SpreadMode::relative;
  double mean_omega = 0.0;
  double mean_r = 0.0;
  std::vector<ImpactObservation> rows;
};

std::array<FeatureTable, kTradeTypes> build_feature_tables(
    const std::string& instrument, std::span<const TradeRecord> trades, int levels,
    SpreadMode mode, const InstrumentConfig& cfg, const StockStats& stats,
    FeatureCounters& counters);

// Feature store: one CSV per instrument x type with the fixed header
// r_norm,omega_norm,spread_rel,VA1..VAL,VB1..VBL,GA1..GAL,GB1..GBL,bucket,
// plus a per-instrument JSON sidecar carrying the stats and skip counters.
std::string feature_csv_name(const std::string& instrument, TradeType type);
void write_feature_csv(const std::string& path, const FeatureTable& table);
FeatureTable read_feature_csv(const std::string& path, const std::string& instrument,
                              TradeType type, int levels, SpreadMode mode, double mean_omega,
                              double mean_r);

}  // namespace impactlab
