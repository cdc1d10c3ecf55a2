#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "impactlab/types.hpp"

namespace impactlab {

struct Execution {
  Tick price = 0;
  Units volume = 0;
  OrderId resting_id = 0;
};

enum class Reject : std::uint8_t { none, duplicate_id, bad_size, bad_price };

struct ExecutionReport {
  std::vector<Execution> executions;
  Units remainder = 0;
  Reject reject = Reject::none;

  bool rejected() const { return reject != Reject::none; }
  bool traded() const { return !executions.empty(); }
  Units executed() const {
    Units total = 0;
    for (const auto& e : executions) total += e.volume;
    return total;
  }
  // Number of distinct price levels the order executed against.
  int levels_touched() const;
};

enum class CancelResult : std::uint8_t { canceled, unknown_id };

// Top-of-book view at a requested depth. Levels are best-first; a side may
// store fewer levels than requested when the book is thin, and the full book
// depth at capture time is kept so callers can tell "thin" from "truncated".
struct BookSnapshot {
  std::vector<Tick> ask_price;
  std::vector<Units> ask_volume;
  std::vector<Tick> bid_price;
  std::vector<Units> bid_volume;
  std::size_t ask_book_depth = 0;  // total ask levels in the book
  std::size_t bid_book_depth = 0;

  std::size_t ask_levels() const { return ask_price.size(); }
  std::size_t bid_levels() const { return bid_price.size(); }

  Tick best_ask() const { return ask_price.front(); }
  Tick best_bid() const { return bid_price.front(); }
  Tick quote_sum() const { return best_ask() + best_bid(); }

  // (a1 - b1) / (a1 + b1), exact.
  Ratio relative_spread() const { return Ratio::of(best_ask() - best_bid(), quote_sum()); }
  double mid() const { return static_cast<double>(quote_sum()) / 2.0; }

  // Gaps between successive occupied levels, 1-based: ask_gap(1) = a2 - a1.
  Tick ask_gap(std::size_t i) const { return ask_price[i] - ask_price[i - 1]; }
  Tick bid_gap(std::size_t i) const { return bid_price[i - 1] - bid_price[i]; }

  bool operator==(const BookSnapshot&) const = default;
};

// Two-sided price-time-priority limit order book.
//
// Prices are integer ticks and comparisons exact. One writer per instrument;
// snapshots are value types and safe to hand to other threads.
class OrderBook {
 public:
  // Executes an incoming limit order against the opposite side (price
  // priority, FIFO within a level) and rests any remainder at `price`.
  ExecutionReport apply_limit_order(Side side, Tick price, Units size, OrderId id);

  // Removes a resting order if present. Unknown ids are a countable no-op:
  // real feeds routinely carry cancels that lost the race with a fill.
  CancelResult apply_cancel(OrderId id);

  // Top-`depth` view, or nullopt while either side is empty.
  std::optional<BookSnapshot> snapshot(std::size_t depth) const;

  bool two_sided() const { return !bids_.empty() && !asks_.empty(); }
  std::size_t bid_levels() const { return bids_.size(); }
  std::size_t ask_levels() const { return asks_.size(); }
  std::optional<Tick> best_bid() const;
  std::optional<Tick> best_ask() const;
  std::optional<Tick> worst_bid() const;  // deepest (lowest) bid level
  std::optional<Tick> worst_ask() const;  // deepest (highest) ask level
  bool contains(OrderId id) const { return index_.count(id) != 0; }
  std::size_t open_orders() const { return index_.size(); }
  Units volume_at(Side side, Tick price) const;
  void clear();

  // Verifies ladder ordering, volume positivity and index consistency;
  // test support, not part of the hot path.
  void check_invariants() const;

 private:
  struct Resting {
    OrderId id;
    Units remaining;
  };
  struct Level {
    std::deque<Resting> queue;
    Units total = 0;
  };
  using BidLadder = std::map<Tick, Level, std::greater<Tick>>;
  using AskLadder = std::map<Tick, Level>;

  template <class Ladder>
  Units match_against(Ladder& ladder, Tick limit, Units size, bool is_sell,
                      std::vector<Execution>& fills);
  template <class Ladder>
  void rest_order(Ladder& ladder, Side side, Tick price, Units size, OrderId id);

  BidLadder bids_;
  AskLadder asks_;
  std::unordered_map<OrderId, std::pair<Side, Tick>> index_;
};

}  // namespace impactlab
