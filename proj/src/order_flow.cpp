#include "impactlab/order_flow.hpp"

#include <zlib.h>

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>

namespace impactlab {

namespace {

constexpr int kAuctionOpen = 9 * 3600 + 15 * 60;
constexpr int kCoolingOpen = 9 * 3600 + 25 * 60;
constexpr int kMorningOpen = 9 * 3600 + 30 * 60;
constexpr int kMorningClose = 11 * 3600 + 30 * 60;
constexpr int kAfternoonOpen = 13 * 3600;
constexpr int kAfternoonClose = 15 * 3600;

}  // namespace

SessionPhase session_phase(const Timestamp& t) {
  const int s = t.sec_of_day;
  if (s < kAuctionOpen) return SessionPhase::closed;
  if (s < kCoolingOpen) return SessionPhase::call_auction;
  if (s < kMorningOpen) return SessionPhase::cooling;
  if (s < kMorningClose) return SessionPhase::continuous_am;
  if (s < kAfternoonOpen) return SessionPhase::freeze;
  if (s < kAfternoonClose) return SessionPhase::continuous_pm;
  return SessionPhase::closed;
}

const char* to_string(SessionPhase p) {
  switch (p) {
    case SessionPhase::closed: return "closed";
    case SessionPhase::call_auction: return "call_auction";
    case SessionPhase::cooling: return "cooling";
    case SessionPhase::continuous_am: return "continuous_am";
    case SessionPhase::freeze: return "freeze";
    case SessionPhase::continuous_pm: return "continuous_pm";
  }
  return "?";
}

namespace {

// Splits a CSV line into exactly 8 fields. No quoting in this schema.
std::array<std::string_view, 8> split_fields(std::string_view line, std::size_t line_no) {
  std::array<std::string_view, 8> out;
  std::size_t field = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      if (field >= out.size()) throw ParseError(line_no, "too many fields");
      out[field++] = line.substr(start, i - start);
      start = i + 1;
    }
  }
  if (field != out.size())
    throw ParseError(line_no, "expected 8 fields, got " + std::to_string(field));
  return out;
}

std::uint64_t parse_u64(std::string_view s, std::size_t line_no, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(line_no, std::string("bad ") + what + ": '" + std::string(s) + "'");
  return v;
}

}  // namespace

OrderEvent parse_event(std::string_view line, std::size_t line_no, const InstrumentConfig& cfg) {
  const auto f = split_fields(line, line_no);
  OrderEvent e;
  try {
    e.timestamp = parse_timestamp(f[0]);
  } catch (const std::exception& ex) {
    throw ParseError(line_no, ex.what());
  }
  e.seq = parse_u64(f[1], line_no, "seq");

  if (f[2] == "S")
    e.action = Action::submit;
  else if (f[2] == "C")
    e.action = Action::cancel;
  else
    throw ParseError(line_no, "bad action: '" + std::string(f[2]) + "'");

  if (e.action == Action::submit) {
    if (f[3] == "B")
      e.side = Side::buy;
    else if (f[3] == "S")
      e.side = Side::sell;
    else
      throw ParseError(line_no, "bad side: '" + std::string(f[3]) + "'");
    try {
      e.price = price_to_ticks(Decimal::parse(f[4]), cfg.tick_size);
    } catch (const std::exception& ex) {
      throw ParseError(line_no, ex.what());
    }
    if (e.price <= 0) throw ParseError(line_no, "price must be positive");
    e.size = static_cast<Units>(parse_u64(f[5], line_no, "size"));
    if (e.size <= 0) throw ParseError(line_no, "size must be positive");
  } else if (!f[3].empty() || !f[4].empty() || !f[5].empty()) {
    throw ParseError(line_no, "cancel must leave side/price/size blank");
  }

  if (f[6].empty()) throw ParseError(line_no, "empty order_id");
  e.order_id = std::string(f[6]);
  if (f[7].empty()) throw ParseError(line_no, "empty instrument");
  e.instrument = std::string(f[7]);
  return e;
}

std::string format_event(const OrderEvent& e, const InstrumentConfig& cfg) {
  std::string out = format_timestamp(e.timestamp);
  out += ',';
  out += std::to_string(e.seq);
  if (e.action == Action::submit) {
    out += ",S,";
    out += (e.side == Side::buy ? 'B' : 'S');
    out += ',';
    out += ticks_to_price_string(e.price, cfg.tick_size);
    out += ',';
    out += std::to_string(e.size);
  } else {
    out += ",C,,,";
  }
  out += ',';
  out += e.order_id;
  out += ',';
  out += e.instrument;
  return out;
}

// ---------------------------------------------------------------------------
// File readers
// ---------------------------------------------------------------------------

struct LineReader::Impl {
  std::ifstream plain;
  gzFile gz = nullptr;
  bool use_gz = false;

  ~Impl() {
    if (gz != nullptr) gzclose(gz);
  }
};

LineReader::LineReader(const std::string& path) : impl_(std::make_unique<Impl>()) {
  impl_->use_gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  if (impl_->use_gz) {
    impl_->gz = gzopen(path.c_str(), "rb");
    if (impl_->gz == nullptr) throw StreamError("cannot open " + path);
  } else {
    impl_->plain.open(path);
    if (!impl_->plain) throw StreamError("cannot open " + path);
  }
}

LineReader::~LineReader() = default;

bool LineReader::next(std::string& line) {
  if (impl_->use_gz) {
    line.clear();
    char buf[4096];
    for (;;) {
      if (gzgets(impl_->gz, buf, sizeof(buf)) == nullptr) {
        if (line.empty()) return false;
        break;
      }
      line += buf;
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        break;
      }
    }
  } else {
    if (!std::getline(impl_->plain, line)) return false;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_no_;
  return true;
}

OrderFlowReader::OrderFlowReader(const std::string& path, InstrumentConfig cfg)
    : lines_(path), cfg_(cfg) {
  if (!lines_.next(buf_)) throw StreamError(path + ": empty file");
  if (buf_ != kOrderFlowHeader)
    throw StreamError(path + ": bad header '" + buf_ + "'");
}

OrderFlowReader::~OrderFlowReader() = default;

bool OrderFlowReader::next(OrderEvent& out) {
  for (;;) {
    if (!lines_.next(buf_)) return false;
    if (buf_.empty()) continue;
    out = parse_event(buf_, lines_.line_no(), cfg_);
    if (seen_seq_ && out.seq <= last_seq_)
      throw StreamError("line " + std::to_string(lines_.line_no()) +
                        ": sequence number not increasing (" + std::to_string(out.seq) +
                        " after " + std::to_string(last_seq_) + ")");
    seen_seq_ = true;
    last_seq_ = out.seq;
    return true;
  }
}

std::vector<OrderEvent> OrderFlowReader::read_all() {
  std::vector<OrderEvent> events;
  OrderEvent e;
  while (next(e)) events.push_back(std::move(e));
  return events;
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

Replayer::Replayer(std::string instrument, std::size_t snapshot_depth)
    : instrument_(std::move(instrument)), snapshot_depth_(snapshot_depth) {}

OrderId Replayer::intern(const std::string& id) {
  auto [it, inserted] = ids_.emplace(id, next_id_);
  if (inserted) ++next_id_;
  return it->second;
}

void Replayer::roll_day(const Timestamp& t) {
  if (have_day_ && day_.same_day(t)) return;
  // Unexecuted orders are removed at the daily close; no carryover.
  book_.clear();
  pending_.clear();
  ids_.clear();
  pending_flushed_ = false;
  have_day_ = true;
  day_ = t;
}

void Replayer::apply_silently(const OrderEvent& event) {
  if (event.action == Action::cancel) {
    auto it = ids_.find(event.order_id);
    if (it == ids_.end() || book_.apply_cancel(it->second) == CancelResult::unknown_id)
      ++counters_.unknown_cancels;
    else
      ++counters_.cancels;
    return;
  }
  // Auction-period orders may cross each other when installed at 09:30; the
  // fills happen mechanically but are not trades in the statistics.
  const auto report = book_.apply_limit_order(event.side, event.price, event.size,
                                              intern(event.order_id));
  if (report.rejected()) ++counters_.rejected;
}

void Replayer::flush_pending() {
  if (pending_flushed_) return;
  pending_flushed_ = true;
  for (const OrderEvent& e : pending_) apply_silently(e);
  pending_.clear();
}

void Replayer::apply_continuous(const OrderEvent& event, const TradeSink& sink) {
  if (event.action == Action::cancel) {
    auto it = ids_.find(event.order_id);
    if (it == ids_.end() || book_.apply_cancel(it->second) == CancelResult::unknown_id)
      ++counters_.unknown_cancels;
    else
      ++counters_.cancels;
    return;
  }

  const auto pre = book_.snapshot(snapshot_depth_);
  const auto report = book_.apply_limit_order(event.side, event.price, event.size,
                                              intern(event.order_id));
  if (report.rejected()) {
    ++counters_.rejected;
    return;
  }
  if (!report.traded()) {
    ++counters_.resting_submits;
    return;
  }
  ++counters_.trades;

  const auto post = book_.snapshot(snapshot_depth_);
  if (!pre || !post) {
    // The mid-quote return needs both quotes on both sides.
    ++counters_.one_sided_skips;
    return;
  }

  TradeRecord rec;
  rec.instrument = instrument_;
  rec.timestamp = event.timestamp;
  rec.seq = event.seq;
  rec.type = classify(event.side, report.remainder);
  rec.omega = report.executed();
  rec.remainder = report.remainder;
  rec.levels_touched = report.levels_touched();
  rec.impact = immediate_return(*pre, *post);
  rec.r = rec.impact.value();
  rec.pre = std::move(*pre);
  rec.post = std::move(*post);
  sink(std::move(rec));
}

void Replayer::process(const OrderEvent& event, const TradeSink& sink) {
  ++counters_.events;
  roll_day(event.timestamp);
  if (event.timestamp.sec_of_day >= kMorningOpen) flush_pending();

  switch (session_phase(event.timestamp)) {
    case SessionPhase::call_auction:
    case SessionPhase::cooling:
      pending_.push_back(event);
      ++counters_.auction_queued;
      return;
    case SessionPhase::continuous_am:
    case SessionPhase::continuous_pm:
      apply_continuous(event, sink);
      return;
    case SessionPhase::freeze:
    case SessionPhase::closed:
      ++counters_.dropped_out_of_session;
      return;
  }
}

void Replayer::finish() {
  book_.clear();
  pending_.clear();
  ids_.clear();
}

std::vector<TradeRecord> Replayer::replay(std::span<const OrderEvent> events) {
  std::vector<TradeRecord> trades;
  const TradeSink sink = [&](TradeRecord&& t) { trades.push_back(std::move(t)); };
  for (const OrderEvent& e : events) process(e, sink);
  finish();
  return trades;
}

std::unordered_map<std::string, std::vector<OrderEvent>> split_by_instrument(
    std::vector<OrderEvent> events) {
  std::unordered_map<std::string, std::vector<OrderEvent>> out;
  for (OrderEvent& e : events) out[e.instrument].push_back(std::move(e));
  return out;
}

}  // namespace impactlab
