#include "impactlab/order_book.hpp"

#include <algorithm>
#include <stdexcept>

namespace impactlab {

int ExecutionReport::levels_touched() const {
  int n = 0;
  Tick last = 0;
  for (const auto& e : executions) {
    if (n == 0 || e.price != last) {
      ++n;
      last = e.price;
    }
  }
  return n;
}

template <class Ladder>
Units OrderBook::match_against(Ladder& ladder, Tick limit, Units size, bool is_sell,
                               std::vector<Execution>& fills) {
  while (size > 0 && !ladder.empty()) {
    auto level_it = ladder.begin();
    const Tick level_price = level_it->first;
    // A sell crosses every bid level priced at or above its limit; a buy,
    // every ask level at or below.
    if (is_sell ? level_price < limit : level_price > limit) break;

    Level& level = level_it->second;
    while (size > 0 && !level.queue.empty()) {
      Resting& front = level.queue.front();
      const Units fill = std::min(size, front.remaining);
      fills.push_back({level_price, fill, front.id});
      size -= fill;
      front.remaining -= fill;
      level.total -= fill;
      if (front.remaining == 0) {
        index_.erase(front.id);
        level.queue.pop_front();
      }
    }
    if (level.queue.empty()) ladder.erase(level_it);
  }
  return size;
}

template <class Ladder>
void OrderBook::rest_order(Ladder& ladder, Side side, Tick price, Units size, OrderId id) {
  Level& level = ladder[price];
  level.queue.push_back({id, size});
  level.total += size;
  index_.emplace(id, std::make_pair(side, price));
}

ExecutionReport OrderBook::apply_limit_order(Side side, Tick price, Units size, OrderId id) {
  ExecutionReport report;
  if (size <= 0) {
    report.reject = Reject::bad_size;
    return report;
  }
  if (price <= 0) {
    report.reject = Reject::bad_price;
    return report;
  }
  if (index_.count(id) != 0) {
    report.reject = Reject::duplicate_id;
    return report;
  }

  Units left;
  if (side == Side::sell) {
    left = match_against(bids_, price, size, /*is_sell=*/true, report.executions);
    if (left > 0) rest_order(asks_, side, price, left, id);
  } else {
    left = match_against(asks_, price, size, /*is_sell=*/false, report.executions);
    if (left > 0) rest_order(bids_, side, price, left, id);
  }
  report.remainder = left;
  return report;
}

CancelResult OrderBook::apply_cancel(OrderId id) {
  auto it = index_.find(id);
  if (it == index_.end()) return CancelResult::unknown_id;
  const auto [side, price] = it->second;

  auto erase_from = [&](auto& ladder) {
    auto level_it = ladder.find(price);
    Level& level = level_it->second;
    auto pos = std::find_if(level.queue.begin(), level.queue.end(),
                            [&](const Resting& r) { return r.id == id; });
    level.total -= pos->remaining;
    level.queue.erase(pos);
    if (level.queue.empty()) ladder.erase(level_it);
  };
  if (side == Side::buy) {
    erase_from(bids_);
  } else {
    erase_from(asks_);
  }
  index_.erase(it);
  return CancelResult::canceled;
}

std::optional<BookSnapshot> OrderBook::snapshot(std::size_t depth) const {
  if (!two_sided()) return std::nullopt;
  BookSnapshot snap;
  snap.ask_book_depth = asks_.size();
  snap.bid_book_depth = bids_.size();
  snap.ask_price.reserve(std::min(depth, asks_.size()));
  for (auto it = asks_.begin(); it != asks_.end() && snap.ask_price.size() < depth; ++it) {
    snap.ask_price.push_back(it->first);
    snap.ask_volume.push_back(it->second.total);
  }
  snap.bid_price.reserve(std::min(depth, bids_.size()));
  for (auto it = bids_.begin(); it != bids_.end() && snap.bid_price.size() < depth; ++it) {
    snap.bid_price.push_back(it->first);
    snap.bid_volume.push_back(it->second.total);
  }
  return snap;
}

std::optional<Tick> OrderBook::best_bid() const {
  if (bids_.empty()) return std::nullopt;
  return bids_.begin()->first;
}

std::optional<Tick> OrderBook::best_ask() const {
  if (asks_.empty()) return std::nullopt;
  return asks_.begin()->first;
}

std::optional<Tick> OrderBook::worst_bid() const {
  if (bids_.empty()) return std::nullopt;
  return bids_.rbegin()->first;
}

std::optional<Tick> OrderBook::worst_ask() const {
  if (asks_.empty()) return std::nullopt;
  return asks_.rbegin()->first;
}

Units OrderBook::volume_at(Side side, Tick price) const {
  if (side == Side::buy) {
    auto it = bids_.find(price);
    return it == bids_.end() ? 0 : it->second.total;
  }
  auto it = asks_.find(price);
  return it == asks_.end() ? 0 : it->second.total;
}

void OrderBook::clear() {
  bids_.clear();
  asks_.clear();
  index_.clear();
}

void OrderBook::check_invariants() const {
  if (two_sided() && bids_.begin()->first >= asks_.begin()->first)
    throw std::logic_error("book crossed: best bid >= best ask");

  std::size_t resting = 0;
  auto check_ladder = [&](const auto& ladder, Side side) {
    for (const auto& [price, level] : ladder) {
      if (price <= 0) throw std::logic_error("non-positive level price");
      if (level.queue.empty()) throw std::logic_error("empty level present in ladder");
      Units total = 0;
      for (const auto& r : level.queue) {
        if (r.remaining <= 0) throw std::logic_error("non-positive resting volume");
        auto it = index_.find(r.id);
        if (it == index_.end() || it->second != std::make_pair(side, price))
          throw std::logic_error("order index out of sync");
        total += r.remaining;
        ++resting;
      }
      if (total != level.total) throw std::logic_error("cached level total out of sync");
    }
  };
  check_ladder(bids_, Side::buy);
  check_ladder(asks_, Side::sell);
  if (resting != index_.size()) throw std::logic_error("index size mismatch");
}

}  // namespace impactlab
