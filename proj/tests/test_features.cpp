#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "impactlab/features.hpp"
#include "impactlab/order_flow.hpp"
#include "impactlab/synth.hpp"

using namespace impactlab;

namespace {

const InstrumentConfig kCfg{};

Timestamp at(int h, int m, int s) { return Timestamp{2003, 6, 2, hms_to_sec(h, m, s)}; }

OrderBook build(const std::vector<BookOrder>& orders) {
  OrderBook book;
  OrderId id = 1;
  for (const BookOrder& o : orders) book.apply_limit_order(o.side, o.price, o.size, id++);
  return book;
}

TradeRecord trade_with_pre(const BookSnapshot& pre, TradeType type = TradeType::FS) {
  TradeRecord t;
  t.timestamp = at(10, 0, 0);
  t.type = type;
  t.omega = 5;
  t.impact = Ratio::of(-1, 2000);
  t.r = t.impact.value();
  t.pre = pre;
  t.post = pre;
  return t;
}

std::vector<TradeRecord> replay_flow(std::uint64_t seed, int events,
                                     ReplayCounters* counters = nullptr) {
  FlowConfig cfg;
  cfg.seed = seed;
  cfg.events = events;
  const auto flow = zero_intelligence_flow(cfg);
  Replayer replayer(cfg.instrument, 6);
  auto trades = replayer.replay(flow);
  if (counters != nullptr) *counters = replayer.counters();
  return trades;
}

}  // namespace

TEST_CASE("intraday buckets cover both sessions at ten minutes") {
  CHECK(intraday_bucket(at(9, 30, 0)) == 0);
  CHECK(intraday_bucket(at(9, 39, 59)) == 0);
  CHECK(intraday_bucket(at(9, 40, 0)) == 1);
  CHECK(intraday_bucket(at(11, 29, 59)) == 11);
  CHECK(intraday_bucket(at(13, 0, 1)) == 12);
  CHECK(intraday_bucket(at(13, 0, 0)) == 12);
  CHECK(intraday_bucket(at(14, 59, 59)) == 23);
  CHECK_THROWS_AS(intraday_bucket(at(12, 0, 0)), SessionError);
  CHECK_THROWS_AS(intraday_bucket(at(9, 20, 0)), SessionError);
  CHECK_THROWS_AS(intraday_bucket(at(15, 0, 0)), SessionError);
}

TEST_CASE("extract reads the regressors straight off the pre snapshot") {
  const ScriptedScenario s = scripted_scenario("fig1_ps");
  OrderBook book = build(s.book);
  const auto snap = book.snapshot(5);
  REQUIRE(snap.has_value());
  const TradeRecord t = trade_with_pre(*snap);

  RawObservation raw;
  REQUIRE(extract(t, 2, SpreadMode::relative, kCfg, raw));
  CHECK(raw.omega == 5);
  CHECK(raw.bucket == 3);  // 10:00 is the fourth morning bin
  // Book: bids 999x2, 998x3, 997x1; asks 1001x3, 1002x1, 1004x2.
  CHECK(raw.bid_depth == std::vector<Units>{2, 3});
  CHECK(raw.ask_depth == std::vector<Units>{3, 1});
  CHECK(raw.spread == doctest::Approx(2.0 / 2000.0));
  CHECK(raw.bid_gap[0] == doctest::Approx(1.0 / 2000.0));
  CHECK(raw.bid_gap[1] == doctest::Approx(1.0 / 2000.0));
  CHECK(raw.ask_gap[0] == doctest::Approx(1.0 / 2000.0));
  CHECK(raw.ask_gap[1] == doctest::Approx(2.0 / 2000.0));

  SUBCASE("raw mode keeps currency units") {
    RawObservation cur;
    REQUIRE(extract(t, 2, SpreadMode::raw, kCfg, cur));
    CHECK(cur.spread == doctest::Approx(0.02));
    CHECK(cur.bid_gap[0] == doctest::Approx(0.01));
    CHECK(cur.ask_gap[1] == doctest::Approx(0.02));
  }
}

TEST_CASE("a symmetric book yields equal ask and bid gaps") {
  OrderBook book = build({{Side::sell, 1001, 2}, {Side::sell, 1003, 4}, {Side::sell, 1006, 1},
                          {Side::buy, 999, 2}, {Side::buy, 997, 4}, {Side::buy, 994, 1}});
  const TradeRecord t = trade_with_pre(*book.snapshot(3));
  RawObservation raw;
  REQUIRE(extract(t, 2, SpreadMode::relative, kCfg, raw));
  CHECK(raw.ask_gap == raw.bid_gap);
  CHECK(raw.ask_depth == raw.bid_depth);
}

TEST_CASE("extraction needs L+1 levels per side for the L-th gap") {
  OrderBook book = build({{Side::sell, 1001, 1}, {Side::sell, 1002, 1}, {Side::sell, 1003, 1},
                          {Side::sell, 1004, 1}, {Side::sell, 1005, 1}, {Side::sell, 1006, 1},
                          {Side::buy, 999, 1}, {Side::buy, 998, 1}, {Side::buy, 997, 1},
                          {Side::buy, 996, 1}});
  const TradeRecord t = trade_with_pre(*book.snapshot(6));  // 4 bid levels stored
  RawObservation raw;
  CHECK(!extract(t, 5, SpreadMode::relative, kCfg, raw));  // thin book: skipped
  CHECK(extract(t, 3, SpreadMode::relative, kCfg, raw));
}

TEST_CASE("scale invariance: multiplying all prices changes nothing in relative mode") {
  auto scaled_raw = [&](Tick scale) {
    std::vector<BookOrder> orders = {{Side::sell, 1001, 3}, {Side::sell, 1003, 1},
                                     {Side::sell, 1004, 2}, {Side::buy, 999, 2},
                                     {Side::buy, 998, 3},   {Side::buy, 995, 1}};
    for (BookOrder& o : orders) o.price *= scale;
    OrderBook book = build(orders);
    const TradeRecord t = trade_with_pre(*book.snapshot(3));
    RawObservation raw;
    REQUIRE(extract(t, 2, SpreadMode::relative, kCfg, raw));
    return raw;
  };
  const RawObservation a = scaled_raw(1);
  const RawObservation b = scaled_raw(3);
  CHECK(a.spread == b.spread);
  CHECK(a.ask_gap == b.ask_gap);
  CHECK(a.bid_gap == b.bid_gap);
  CHECK(a.ask_depth == b.ask_depth);
}

TEST_CASE("different tick sizes with the same quotes give identical observations") {
  // The same decimal prices parsed under tick 0.01 vs 0.005 double every tick
  // count; nothing normalized may change.
  auto run = [](const char* tick) {
    const InstrumentConfig cfg{Decimal::parse(tick), 1};
    const std::vector<std::string> lines = {
        "2003-06-02T09:30:00,1,S,B,9.99,2,o1,X",  "2003-06-02T09:30:00,2,S,B,9.98,3,o2,X",
        "2003-06-02T09:30:00,3,S,B,9.97,1,o3,X",  "2003-06-02T09:30:00,4,S,B,9.96,4,o4,X",
        "2003-06-02T09:30:00,5,S,S,10.01,3,o5,X", "2003-06-02T09:30:00,6,S,S,10.02,1,o6,X",
        "2003-06-02T09:30:01,7,S,S,10.04,2,o7,X", "2003-06-02T09:30:01,8,S,S,10.05,2,o8,X",
        "2003-06-02T09:30:02,9,S,S,9.98,6,hit,X",
    };
    std::vector<OrderEvent> events;
    for (std::size_t i = 0; i < lines.size(); ++i)
      events.push_back(parse_event(lines[i], i + 1, cfg));
    Replayer replayer("X", 3);
    const auto trades = replayer.replay(events);
    REQUIRE(trades.size() == 1);
    RawObservation raw;
    REQUIRE(extract(trades[0], 2, SpreadMode::relative, cfg, raw));
    return raw;
  };
  const RawObservation a = run("0.01");
  const RawObservation b = run("0.005");
  CHECK(a.r == b.r);
  CHECK(a.spread == b.spread);
  CHECK(a.ask_gap == b.ask_gap);
  CHECK(a.bid_gap == b.bid_gap);
  CHECK(a.ask_depth == b.ask_depth);
  CHECK(a.omega == b.omega);
}

TEST_CASE("normalization identities hold at 1e-12 per instrument and type") {
  const auto trades = replay_flow(77, 10000);
  REQUIRE(trades.size() > 500);
  const StockStats stats = compute_stock_stats("SYN001", trades);
  const Normalizer norm(stats);

  std::array<NeumaierSum, kTradeTypes> r_sum;
  std::array<NeumaierSum, kTradeTypes> omega_sum;
  std::array<std::size_t, kTradeTypes> count{};
  RawObservation raw;
  for (const TradeRecord& t : trades) {
    REQUIRE(extract(t, 5, SpreadMode::relative, kCfg, raw));
    REQUIRE(norm.usable(raw.type));
    const ImpactObservation obs = norm.normalize(raw);
    const int k = static_cast<int>(raw.type);
    r_sum[k].add(obs.r_norm);
    omega_sum[k].add(obs.omega_norm);
    ++count[k];
  }
  for (int k = 0; k < kTradeTypes; ++k) {
    REQUIRE(count[k] > 0);
    const double n = static_cast<double>(count[k]);
    CHECK(std::abs(r_sum[k].total() / n - 1.0) < 1e-12);
    CHECK(std::abs(omega_sum[k].total() / n - 1.0) < 1e-12);
  }
}

TEST_CASE("dummy encoding: exactly one active bucket, bucket zero silent") {
  const auto trades = replay_flow(31, 3000);
  const StockStats stats = compute_stock_stats("SYN001", trades);
  const Normalizer norm(stats);
  RawObservation raw;
  for (const TradeRecord& t : trades) {
    REQUIRE(extract(t, 2, SpreadMode::relative, kCfg, raw));
    const ImpactObservation obs = norm.normalize(raw);
    double total = 0.0;
    for (double share : obs.bucket_share) total += share;
    CHECK(total == 1.0);
    CHECK(obs.bucket_share[obs.bucket] == 1.0);
  }
}

TEST_CASE("a type with zero mean return is excluded with a count") {
  StockStats stats;
  stats.instrument = "x";
  auto& fs = stats.per_type[static_cast<int>(TradeType::FS)];
  fs.count = 10;
  fs.mean_r = 0.0;  // all zero-impact trades
  fs.mean_omega = 100.0;
  auto& ps = stats.per_type[static_cast<int>(TradeType::PS)];
  ps.count = 5;
  ps.mean_r = -1e-3;
  ps.mean_omega = 50.0;

  const Normalizer norm(stats);
  CHECK(!norm.usable(TradeType::FS));
  CHECK(norm.usable(TradeType::PS));
  CHECK(!norm.usable(TradeType::PB));  // absent type
}

TEST_CASE("feature store round trips rows and reconstructs the size key") {
  const auto trades = replay_flow(13, 4000);
  const StockStats stats = compute_stock_stats("SYN001", trades);
  FeatureCounters counters;
  const auto tables =
      build_feature_tables("SYN001", trades, 5, SpreadMode::relative, kCfg, stats, counters);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "impactlab_feature_store";
  fs::create_directories(dir);
  for (const FeatureTable& table : tables) {
    if (table.rows.empty()) continue;
    const fs::path path = dir / feature_csv_name("SYN001", table.type);
    write_feature_csv(path.string(), table);
    const FeatureTable back = read_feature_csv(path.string(), "SYN001", table.type, 5,
                                               SpreadMode::relative, table.mean_omega,
                                               table.mean_r);
    REQUIRE(back.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const ImpactObservation& a = table.rows[i];
      const ImpactObservation& b = back.rows[i];
      CHECK(a.omega_raw == b.omega_raw);  // exact size key through the CSV
      CHECK(a.r_norm == b.r_norm);
      CHECK(a.omega_norm == b.omega_norm);
      CHECK(a.spread == b.spread);
      CHECK(a.ask_depth == b.ask_depth);
      CHECK(a.bid_gap == b.bid_gap);
      CHECK(a.bucket == b.bucket);
    }
  }
}
