#pragma once

#include "impactlab/order_book.hpp"
#include "impactlab/types.hpp"

namespace impactlab {

enum class PredictStatus : std::uint8_t {
  ok,
  no_execution,        // limit does not cross; order would rest
  insufficient_depth,  // snapshot too shallow to resolve the execution
  undefined_return,    // order empties the opposite side; no post mid-quote
};

// Closed-form outcome of sending one limit order into a known book state.
// `impact` decomposes (partially filled case) into a spread, a gap and a
// residual limit-price term that sum to it exactly.
struct MechanicalOutcome {
  PredictStatus status = PredictStatus::no_execution;
  TradeType kind = TradeType::FS;
  int levels_reached = 0;  // deepest opposite level the order touches
  Units executed = 0;
  Units remainder = 0;
  Ratio impact{};
  Ratio spread_term{};
  Ratio gap_term{};
  Ratio residual_term{};
};

// Predicts the full execution outcome of a sell (buy) limit order of the
// given size against the snapshot, in exact tick arithmetic. The snapshot's
// recorded full-book depth distinguishes a truncated view (insufficient
// depth) from a genuinely exhausted side (undefined return).
MechanicalOutcome predict_sell(const BookSnapshot& snap, Tick limit_price, Units size);
MechanicalOutcome predict_buy(const BookSnapshot& snap, Tick limit_price, Units size);

// Impact difference between a partially filled and a fully filled sell at the
// same limit price: -(a1 - pi) / (a1 + b1). Its magnitude is bounded below by
// the relative spread whenever pi <= b1.
Ratio ps_fs_gap(const BookSnapshot& snap, Tick limit_price);

}  // namespace impactlab
