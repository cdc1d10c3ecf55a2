#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "impactlab/order_book.hpp"
#include "impactlab/trades.hpp"
#include "impactlab/types.hpp"

namespace impactlab {

// SZSE daily session schedule. Boundaries belong to the later phase
// (09:30:00 is already continuous trading).
enum class SessionPhase : std::uint8_t {
  closed,
  call_auction,    // [09:15, 09:25)
  cooling,         // [09:25, 09:30)
  continuous_am,   // [09:30, 11:30)
  freeze,          // [11:30, 13:00)
  continuous_pm,   // [13:00, 15:00)
};

SessionPhase session_phase(const Timestamp& t);
const char* to_string(SessionPhase p);

inline bool is_continuous(SessionPhase p) {
  return p == SessionPhase::continuous_am || p == SessionPhase::continuous_pm;
}

enum class Action : std::uint8_t { submit, cancel };

// One order-flow record. Cancels carry only the order id; side/price/size
// stay blank in the feed and zero here.
struct OrderEvent {
  Timestamp timestamp;
  Seq seq = 0;
  Action action = Action::submit;
  Side side = Side::buy;
  Tick price = 0;
  Units size = 0;
  std::string order_id;
  std::string instrument;
};

inline constexpr std::string_view kOrderFlowHeader =
    "timestamp,seq,action,side,price,size,order_id,instrument";

OrderEvent parse_event(std::string_view line, std::size_t line_no, const InstrumentConfig& cfg);
std::string format_event(const OrderEvent& e, const InstrumentConfig& cfg);

// Reads text lines from a plain or gzip-compressed file (by ".gz" suffix).
class LineReader {
 public:
  explicit LineReader(const std::string& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  bool next(std::string& line);
  std::size_t line_no() const { return line_no_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t line_no_ = 0;
};

// Order-flow CSV reader: checks the header, parses records and enforces
// strictly increasing sequence numbers.
class OrderFlowReader {
 public:
  OrderFlowReader(const std::string& path, InstrumentConfig cfg);
  ~OrderFlowReader();

  // Returns false at end of stream; throws ParseError / StreamError.
  bool next(OrderEvent& out);
  std::vector<OrderEvent> read_all();

 private:
  LineReader lines_;
  InstrumentConfig cfg_;
  std::string buf_;
  bool seen_seq_ = false;
  Seq last_seq_ = 0;
};

struct ReplayCounters {
  std::size_t events = 0;
  std::size_t trades = 0;
  std::size_t resting_submits = 0;     // continuous submits that did not cross
  std::size_t cancels = 0;
  std::size_t unknown_cancels = 0;
  std::size_t rejected = 0;            // engine rejections (duplicate id, bad size/price)
  std::size_t auction_queued = 0;      // call-auction / cooling events held for 09:30
  std::size_t dropped_out_of_session = 0;
  std::size_t one_sided_skips = 0;     // executions with no pre or post mid-quote
};

// Replays one instrument's event stream through the matching engine and emits
// a TradeRecord for every continuous-session order that executes. Call
// auction and cooling events are queued and installed into the book at 09:30
// without emitting trades; freeze and closed-phase events are dropped; the
// book is cleared at end of day.
class Replayer {
 public:
  using TradeSink = std::function<void(TradeRecord&&)>;

  Replayer(std::string instrument, std::size_t snapshot_depth);

  void process(const OrderEvent& event, const TradeSink& sink);
  void finish();  // end-of-stream: clears the book

  std::vector<TradeRecord> replay(std::span<const OrderEvent> events);

  const ReplayCounters& counters() const { return counters_; }
  const OrderBook& book() const { return book_; }

 private:
  OrderId intern(const std::string& id);
  void apply_continuous(const OrderEvent& event, const TradeSink& sink);
  void apply_silently(const OrderEvent& event);
  void flush_pending();
  void roll_day(const Timestamp& t);

  std::string instrument_;
  std::size_t snapshot_depth_;
  OrderBook book_;
  std::vector<OrderEvent> pending_;  // auction + cooling queue
  bool pending_flushed_ = false;
  bool have_day_ = false;
  Timestamp day_{};
  std::unordered_map<std::string, OrderId> ids_;
  OrderId next_id_ = 1;
  ReplayCounters counters_;
};

// Groups a mixed-instrument event stream by instrument, preserving sequence
// order within each group.
std::unordered_map<std::string, std::vector<OrderEvent>> split_by_instrument(
    std::vector<OrderEvent> events);

}  // namespace impactlab
