#include "impactlab/features.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "impactlab/order_flow.hpp"

namespace impactlab {

namespace {

constexpr int kMorningOpen = 9 * 3600 + 30 * 60;
constexpr int kAfternoonOpen = 13 * 3600;

}  // namespace

int intraday_bucket(const Timestamp& t) {
  const SessionPhase phase = session_phase(t);
  if (phase == SessionPhase::continuous_am)
    return (t.sec_of_day - kMorningOpen) / 600;
  if (phase == SessionPhase::continuous_pm)
    return 12 + (t.sec_of_day - kAfternoonOpen) / 600;
  throw SessionError("timestamp " + format_timestamp(t) + " outside continuous sessions");
}

const char* to_string(SpreadMode m) { return m == SpreadMode::relative ? "rel" : "raw"; }

bool extract(const TradeRecord& trade, int levels, SpreadMode mode, const InstrumentConfig& cfg,
             RawObservation& out) {
  const BookSnapshot& pre = trade.pre;
  const std::size_t need = static_cast<std::size_t>(levels) + 1;  // L-th gap spans L..L+1
  if (pre.ask_levels() < need || pre.bid_levels() < need) return false;

  out.type = trade.type;
  out.omega = trade.omega;
  out.r = trade.r;
  out.bucket = intraday_bucket(trade.timestamp);

  const double tick_value = cfg.tick_size.value();
  if (mode == SpreadMode::relative)
    out.spread = pre.relative_spread().value();
  else
    out.spread = static_cast<double>(pre.best_ask() - pre.best_bid()) * tick_value;

  out.ask_depth.assign(pre.ask_volume.begin(), pre.ask_volume.begin() + levels);
  out.bid_depth.assign(pre.bid_volume.begin(), pre.bid_volume.begin() + levels);
  out.ask_gap.resize(levels);
  out.bid_gap.resize(levels);
  for (int i = 1; i <= levels; ++i) {
    if (mode == SpreadMode::relative) {
      out.ask_gap[i - 1] = Ratio::of(pre.ask_gap(i), pre.quote_sum()).value();
      out.bid_gap[i - 1] = Ratio::of(pre.bid_gap(i), pre.quote_sum()).value();
    } else {
      out.ask_gap[i - 1] = static_cast<double>(pre.ask_gap(i)) * tick_value;
      out.bid_gap[i - 1] = static_cast<double>(pre.bid_gap(i)) * tick_value;
    }
  }
  return true;
}

bool Normalizer::usable(TradeType t) const {
  const TypeStats& ts = stats_->of(t);
  return ts.present() && ts.mean_r != 0.0;
}

ImpactObservation Normalizer::normalize(const RawObservation& raw) const {
  const TypeStats& ts = stats_->of(raw.type);
  ImpactObservation obs;
  obs.omega_raw = raw.omega;
  obs.r_norm = raw.r / ts.mean_r;
  obs.omega_norm = static_cast<double>(raw.omega) / ts.mean_omega;
  obs.spread = raw.spread;
  const double abs_mean_r = std::abs(ts.mean_r);
  const std::size_t levels = raw.ask_depth.size();
  obs.ask_depth.resize(levels);
  obs.bid_depth.resize(levels);
  obs.ask_gap.resize(levels);
  obs.bid_gap.resize(levels);
  for (std::size_t i = 0; i < levels; ++i) {
    obs.ask_depth[i] = static_cast<double>(raw.ask_depth[i]) / ts.mean_omega;
    obs.bid_depth[i] = static_cast<double>(raw.bid_depth[i]) / ts.mean_omega;
    obs.ask_gap[i] = raw.ask_gap[i] / abs_mean_r;
    obs.bid_gap[i] = raw.bid_gap[i] / abs_mean_r;
  }
  obs.bucket = raw.bucket;
  obs.bucket_share[raw.bucket] = 1.0;
  obs.weight = 1.0;
  return obs;
}

std::array<FeatureTable, kTradeTypes> build_feature_tables(
    const std::string& instrument, std::span<const TradeRecord> trades, int levels,
    SpreadMode mode, const InstrumentConfig& cfg, const StockStats& stats,
    FeatureCounters& counters) {
  std::array<FeatureTable, kTradeTypes> tables;
  const Normalizer norm(stats);
  for (int k = 0; k < kTradeTypes; ++k) {
    FeatureTable& t = tables[k];
    t.instrument = instrument;
    t.type = static_cast<TradeType>(k);
    t.levels = levels;
    t.mode = mode;
    t.mean_omega = stats.per_type[k].mean_omega;
    t.mean_r = stats.per_type[k].mean_r;
  }
  RawObservation raw;
  for (const TradeRecord& trade : trades) {
    if (!extract(trade, levels, mode, cfg, raw)) {
      ++counters.thin_book_skips;
      continue;
    }
    const Normalizer n(stats);
    if (!n.usable(raw.type)) {
      ++counters.excluded_types;
      continue;
    }
    tables[static_cast<int>(raw.type)].rows.push_back(norm.normalize(raw));
  }
  return tables;
}

// ---------------------------------------------------------------------------
// Feature store
// ---------------------------------------------------------------------------

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(line_no, "bad number '" + std::string(s) + "'");
  return v;
}

std::string feature_header(int levels) {
  std::string h = "r_norm,omega_norm,spread_rel";
  auto block = [&](const char* name) {
    for (int i = 1; i <= levels; ++i) h += "," + std::string(name) + std::to_string(i);
  };
  block("VA");
  block("VB");
  block("GA");
  block("GB");
  h += ",bucket";
  return h;
}

}  // namespace

std::string feature_csv_name(const std::string& instrument, TradeType type) {
  return instrument + "_" + to_string(type) + ".csv";
}

void write_feature_csv(const std::string& path, const FeatureTable& table) {
  std::ofstream out(path);
  if (!out) throw StreamError("cannot write " + path);
  out << feature_header(table.levels) << '\n';
  std::string line;
  for (const ImpactObservation& o : table.rows) {
    line.clear();
    append_double(line, o.r_norm);
    line += ',';
    append_double(line, o.omega_norm);
    line += ',';
    append_double(line, o.spread);
    auto block = [&](const std::vector<double>& v) {
      for (double x : v) {
        line += ',';
        append_double(line, x);
      }
    };
    block(o.ask_depth);
    block(o.bid_depth);
    block(o.ask_gap);
    block(o.bid_gap);
    line += ',';
    line += std::to_string(o.bucket);
    out << line << '\n';
  }
}

FeatureTable read_feature_csv(const std::string& path, const std::string& instrument,
                              TradeType type, int levels, SpreadMode mode, double mean_omega,
                              double mean_r) {
  FeatureTable table;
  table.instrument = instrument;
  table.type = type;
  table.levels = levels;
  table.mode = mode;
  table.mean_omega = mean_omega;
  table.mean_r = mean_r;

  LineReader lines(path);
  std::string line;
  if (!lines.next(line)) throw StreamError(path + ": empty feature file");
  if (line != feature_header(levels))
    throw StreamError(path + ": feature header does not match L=" + std::to_string(levels));

  const std::size_t n_cols = 4 + 4 * static_cast<std::size_t>(levels);
  std::vector<std::string_view> fields;
  while (lines.next(line)) {
    if (line.empty()) continue;
    fields.clear();
    std::size_t start = 0;
    const std::string_view sv(line);
    for (std::size_t i = 0; i <= sv.size(); ++i) {
      if (i == sv.size() || sv[i] == ',') {
        fields.push_back(sv.substr(start, i - start));
        start = i + 1;
      }
    }
    if (fields.size() != n_cols)
      throw ParseError(lines.line_no(), "expected " + std::to_string(n_cols) + " columns");

    ImpactObservation o;
    std::size_t f = 0;
    o.r_norm = parse_double(fields[f++], lines.line_no());
    o.omega_norm = parse_double(fields[f++], lines.line_no());
    o.spread = parse_double(fields[f++], lines.line_no());
    auto block = [&](std::vector<double>& v) {
      v.resize(levels);
      for (int i = 0; i < levels; ++i) v[i] = parse_double(fields[f++], lines.line_no());
    };
    block(o.ask_depth);
    block(o.bid_depth);
    block(o.ask_gap);
    block(o.bid_gap);
    const long bucket = std::strtol(std::string(fields[f]).c_str(), nullptr, 10);
    if (bucket < 0 || bucket >= kIntradayBuckets)
      throw ParseError(lines.line_no(), "bucket out of range");
    o.bucket = static_cast<int>(bucket);
    o.bucket_share[o.bucket] = 1.0;
    // The store keeps the pinned column set only; the exact-size group key is
    // reconstructed from the sidecar's mean trade size.
    o.omega_raw = std::llround(o.omega_norm * mean_omega);
    o.weight = 1.0;
    table.rows.push_back(std::move(o));
  }
  return table;
}

}  // namespace impactlab
