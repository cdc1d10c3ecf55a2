#include "impactlab/mechanics.hpp"

#include <span>

namespace impactlab {

namespace {

// Side-generic resolution: an incoming order consumes the opposite ladder in
// price priority. `crosses(level)` says whether the limit reaches a level.
struct OppositeSide {
  std::span<const Tick> price;
  std::span<const Units> volume;
  std::size_t book_depth;  // total levels in the book, stored or not
};

MechanicalOutcome resolve(const BookSnapshot& snap, const OppositeSide& opp, Side side,
                          Tick limit_price, Units size) {
  MechanicalOutcome out;
  const bool selling = side == Side::sell;
  const Tick a1 = snap.best_ask();
  const Tick b1 = snap.best_bid();
  const Tick den = a1 + b1;
  const Tick opp_best = selling ? b1 : a1;

  auto crosses = [&](Tick level) { return selling ? level >= limit_price : level <= limit_price; };

  if (size <= 0 || limit_price <= 0 || !crosses(opp.price[0])) {
    out.status = PredictStatus::no_execution;
    out.remainder = size;
    return out;
  }

  const std::size_t stored = opp.price.size();
  std::size_t crossable = 0;
  Units cum = 0;
  std::size_t fill_level = 0;  // 1-based level where the order's size runs out
  Units cum_at_fill = 0;
  while (crossable < stored && crosses(opp.price[crossable])) {
    cum += opp.volume[crossable];
    ++crossable;
    if (fill_level == 0 && cum >= size) {
      fill_level = crossable;
      cum_at_fill = cum;
    }
  }

  // Shared decomposition pieces; only meaningful for the partially filled
  // case, where all three terms carry the initiating side's sign.
  auto fill_decomposition = [&](Tick opp_next) {
    const Tick spread_num = selling ? -(a1 - b1) : (a1 - b1);
    out.spread_term = Ratio::of(spread_num, den);
    out.gap_term = Ratio::of(opp_next - opp_best, den);
    out.residual_term = Ratio::of(limit_price - opp_best, den);
  };

  if (fill_level != 0) {
    // Fully filled: the order dies inside the crossable prefix.
    out.kind = selling ? TradeType::FS : TradeType::FB;
    out.executed = size;
    out.remainder = 0;
    out.levels_reached = static_cast<int>(fill_level);
    if (cum_at_fill > size) {
      // Level `fill_level` keeps reduced volume; its price is the new best.
      out.status = PredictStatus::ok;
      out.impact = Ratio::of(opp.price[fill_level - 1] - opp_best, den);
      out.gap_term = out.impact;
    } else {
      // Exact fill: the new best is the next occupied level.
      if (fill_level < stored) {
        out.status = PredictStatus::ok;
        out.impact = Ratio::of(opp.price[fill_level] - opp_best, den);
        out.gap_term = out.impact;
      } else if (fill_level < opp.book_depth) {
        out.status = PredictStatus::insufficient_depth;
      } else {
        out.status = PredictStatus::undefined_return;
      }
    }
    return out;
  }

  // Partially filled: the order eats every crossable level and rests.
  out.kind = selling ? TradeType::PS : TradeType::PB;
  out.executed = cum;
  out.remainder = size - cum;
  out.levels_reached = static_cast<int>(crossable);
  if (crossable < stored) {
    // Next stored level does not cross, so it survives as the new opposite
    // best while the remainder becomes the new same-side best.
    const Tick opp_next = opp.price[crossable];
    out.status = PredictStatus::ok;
    out.impact = Ratio::of(limit_price + opp_next - a1 - b1, den);
    fill_decomposition(opp_next);
  } else if (stored < opp.book_depth) {
    out.status = PredictStatus::insufficient_depth;
  } else {
    out.status = PredictStatus::undefined_return;
  }
  return out;
}

}  // namespace

MechanicalOutcome predict_sell(const BookSnapshot& snap, Tick limit_price, Units size) {
  OppositeSide opp{snap.bid_price, snap.bid_volume, snap.bid_book_depth};
  return resolve(snap, opp, Side::sell, limit_price, size);
}

MechanicalOutcome predict_buy(const BookSnapshot& snap, Tick limit_price, Units size) {
  OppositeSide opp{snap.ask_price, snap.ask_volume, snap.ask_book_depth};
  return resolve(snap, opp, Side::buy, limit_price, size);
}

Ratio ps_fs_gap(const BookSnapshot& snap, Tick limit_price) {
  return Ratio::of(-(snap.best_ask() - limit_price), snap.quote_sum());
}

}  // namespace impactlab
