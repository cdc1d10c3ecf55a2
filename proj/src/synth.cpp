#include "impactlab/synth.hpp"

#include <algorithm>
#include <cmath>

#include "impactlab/order_book.hpp"

namespace impactlab {

// ---------------------------------------------------------------------------
// Rng
// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t Rng::next() {
  // xoshiro256++
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

std::uint64_t Rng::bounded(std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(bounded(static_cast<std::uint64_t>(hi - lo + 1)));
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

double Rng::lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

int Rng::geometric(double p) {
  int k = 0;
  while (!bernoulli(p)) ++k;
  return k;
}

// ---------------------------------------------------------------------------
// Scripted scenarios
// ---------------------------------------------------------------------------

namespace {

MechanicalOutcome expect(TradeType kind, int levels, Units executed, Units remainder,
                         Ratio impact, Ratio spread_term = {}, Ratio gap_term = {},
                         Ratio residual_term = {}) {
  MechanicalOutcome out;
  out.status = PredictStatus::ok;
  out.kind = kind;
  out.levels_reached = levels;
  out.executed = executed;
  out.remainder = remainder;
  out.impact = impact;
  if (is_partial(kind)) {
    out.spread_term = spread_term;
    out.gap_term = gap_term;
    out.residual_term = residual_term;
  } else {
    // Filled trades carry no spread or limit-price component.
    out.gap_term = impact;
  }
  return out;
}

std::vector<BookOrder> fig1_sell_book() {
  return {
      {Side::sell, 1001, 3}, {Side::sell, 1002, 1}, {Side::sell, 1004, 2},
      {Side::sell, 1005, 5}, {Side::sell, 1007, 1}, {Side::buy, 999, 2},
      {Side::buy, 998, 3},   {Side::buy, 997, 1},   {Side::buy, 995, 4},
      {Side::buy, 994, 2},
  };
}

std::vector<BookOrder> fig1_buy_book() {
  return {
      {Side::sell, 1001, 2}, {Side::sell, 1002, 3}, {Side::sell, 1003, 1},
      {Side::sell, 1005, 4}, {Side::sell, 1006, 2}, {Side::buy, 999, 3},
      {Side::buy, 998, 1},   {Side::buy, 996, 2},   {Side::buy, 995, 5},
      {Side::buy, 993, 1},
  };
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "fig1_ps", "fig1_fs", "fig1_pb", "fig1_fb",
      "exact_fill", "level1_fs", "level1_fb", "deep_sweep",
  };
  return names;
}

ScriptedScenario scripted_scenario(std::string_view name) {
  ScriptedScenario s;
  s.name = std::string(name);
  if (name == "fig1_ps") {
    // Sell between bid levels 3 and 4, sized past the three crossable levels:
    // partially filled, one lot rests as the new best ask.
    s.book = fig1_sell_book();
    s.incoming_side = Side::sell;
    s.limit_price = 996;
    s.size = 7;
    s.depth = 5;
    s.expected = expect(TradeType::PS, 3, 6, 1, Ratio::of(-9, 2000), Ratio::of(-2, 2000),
                        Ratio::of(-4, 2000), Ratio::of(-3, 2000));
  } else if (name == "fig1_fs") {
    // Same book, sell sized to drain levels 1-3 exactly.
    s.book = fig1_sell_book();
    s.incoming_side = Side::sell;
    s.limit_price = 995;
    s.size = 6;
    s.depth = 5;
    s.expected = expect(TradeType::FS, 3, 6, 0, Ratio::of(-4, 2000));
  } else if (name == "fig1_pb") {
    s.book = fig1_buy_book();
    s.incoming_side = Side::buy;
    s.limit_price = 1004;
    s.size = 7;
    s.depth = 5;
    s.expected = expect(TradeType::PB, 3, 6, 1, Ratio::of(9, 2000), Ratio::of(2, 2000),
                        Ratio::of(4, 2000), Ratio::of(3, 2000));
  } else if (name == "fig1_fb") {
    s.book = fig1_buy_book();
    s.incoming_side = Side::buy;
    s.limit_price = 1005;
    s.size = 6;
    s.depth = 5;
    s.expected = expect(TradeType::FB, 3, 6, 0, Ratio::of(4, 2000));
  } else if (name == "exact_fill") {
    s.book = {{Side::sell, 1002, 4}, {Side::sell, 1003, 2}, {Side::buy, 1000, 5},
              {Side::buy, 999, 1}};
    s.incoming_side = Side::buy;
    s.limit_price = 1002;
    s.size = 4;
    s.depth = 2;
    s.expected = expect(TradeType::FB, 1, 4, 0, Ratio::of(1, 2002));
  } else if (name == "level1_fs") {
    s.book = {{Side::sell, 1001, 3}, {Side::sell, 1002, 1}, {Side::buy, 999, 2},
              {Side::buy, 998, 3}};
    s.incoming_side = Side::sell;
    s.limit_price = 999;
    s.size = 1;
    s.depth = 2;
    s.expected = expect(TradeType::FS, 1, 1, 0, Ratio::of(0, 1));
  } else if (name == "level1_fb") {
    s.book = {{Side::sell, 1001, 3}, {Side::sell, 1002, 1}, {Side::buy, 999, 2},
              {Side::buy, 998, 3}};
    s.incoming_side = Side::buy;
    s.limit_price = 1001;
    s.size = 2;
    s.depth = 2;
    s.expected = expect(TradeType::FB, 1, 2, 0, Ratio::of(0, 1));
  } else if (name == "deep_sweep") {
    // Five bid levels consumed, remainder resting in the sixth gap.
    s.book = {{Side::sell, 1002, 3}, {Side::sell, 1003, 1}, {Side::sell, 1005, 2},
              {Side::sell, 1006, 1}, {Side::sell, 1008, 4}, {Side::buy, 1000, 1},
              {Side::buy, 998, 1},   {Side::buy, 996, 1},   {Side::buy, 994, 1},
              {Side::buy, 992, 1},   {Side::buy, 990, 2}};
    s.incoming_side = Side::sell;
    s.limit_price = 991;
    s.size = 9;
    s.depth = 6;
    s.expected = expect(TradeType::PS, 5, 5, 4, Ratio::of(-21, 2002), Ratio::of(-2, 2002),
                        Ratio::of(-10, 2002), Ratio::of(-9, 2002));
  } else {
    throw std::invalid_argument("unknown scenario: " + std::string(name));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Zero-intelligence flow
// ---------------------------------------------------------------------------

namespace {

class FlowBuilder {
 public:
  explicit FlowBuilder(const FlowConfig& cfg) : cfg_(cfg), rng_(cfg.seed), now_(cfg.start) {
    if (cfg_.time_advance_p <= 0.0) {
      const double mean_stride =
          4.0 * 3600.0 / std::max(1.0, static_cast<double>(cfg_.events));
      cfg_.time_advance_p = std::clamp(1.0 / (1.0 + mean_stride), 0.05, 0.95);
    }
  }

  std::vector<OrderEvent> run() {
    seed_book();
    while (static_cast<int>(events_.size()) < cfg_.events) {
      step();
      advance_clock();
      if (done_) break;
    }
    return std::move(events_);
  }

 private:
  static constexpr int kMorningClose = 11 * 3600 + 30 * 60;
  static constexpr int kAfternoonOpen = 13 * 3600;
  static constexpr int kAfternoonClose = 15 * 3600;

  void advance_clock() {
    now_.sec_of_day += rng_.geometric(cfg_.time_advance_p);
    if (now_.sec_of_day >= kMorningClose && now_.sec_of_day < kAfternoonOpen)
      now_.sec_of_day = kAfternoonOpen + (now_.sec_of_day - kMorningClose);
    if (now_.sec_of_day >= kAfternoonClose) {
      // Next trading day: the session close wipes the book.
      ++now_.day;  // synthetic calendar; month arithmetic is irrelevant here
      now_.sec_of_day = hms_to_sec(9, 30, 0);
      book_.clear();
      live_.clear();
      seed_book();
    }
  }

  void emit_submit(Side side, Tick price, Units size) {
    OrderEvent e;
    e.timestamp = now_;
    e.seq = next_seq_++;
    e.action = Action::submit;
    e.side = side;
    e.price = price;
    e.size = size;
    const OrderId id = next_id_++;
    e.order_id = "z" + std::to_string(id);
    e.instrument = cfg_.instrument;
    events_.push_back(e);
    const auto report = book_.apply_limit_order(side, price, size, id);
    if (report.remainder > 0) live_.push_back(id);
    if (static_cast<int>(events_.size()) >= cfg_.events) done_ = true;
  }

  void emit_cancel(OrderId id) {
    OrderEvent e;
    e.timestamp = now_;
    e.seq = next_seq_++;
    e.action = Action::cancel;
    e.order_id = "z" + std::to_string(id);
    e.instrument = cfg_.instrument;
    events_.push_back(e);
    book_.apply_cancel(id);
    if (static_cast<int>(events_.size()) >= cfg_.events) done_ = true;
  }

  Units draw_size() {
    const double v = rng_.lognormal(cfg_.size_ln_mu, cfg_.size_ln_sigma);
    return std::max<Units>(1, static_cast<Units>(std::llround(v))) *
           cfg_.instrument_cfg.lot_size;
  }

  void seed_book() {
    for (int l = 0; l < cfg_.replenish_levels && !done_; ++l) {
      emit_submit(Side::buy, cfg_.initial_mid - 1 - l, draw_size());
      if (done_) break;
      emit_submit(Side::sell, cfg_.initial_mid + 1 + l, draw_size());
    }
  }

  void replenish() {
    // Keep both sides populated so L=5 snapshots rarely come up short. New
    // levels extend past the deepest resting price, so each submit is
    // guaranteed to add a level.
    while (!done_ && static_cast<int>(book_.bid_levels()) < cfg_.replenish_levels) {
      const Tick anchor = book_.worst_bid() ? *book_.worst_bid() : cfg_.initial_mid;
      const Tick price = std::max<Tick>(1, anchor - 1 - rng_.uniform_int(0, 2));
      emit_submit(Side::buy, price, draw_size());
    }
    while (!done_ && static_cast<int>(book_.ask_levels()) < cfg_.replenish_levels) {
      const Tick anchor = book_.worst_ask() ? *book_.worst_ask() : cfg_.initial_mid;
      emit_submit(Side::sell, anchor + 1 + rng_.uniform_int(0, 2), draw_size());
    }
  }

  void step() {
    const double u = rng_.uniform();
    if (u < cfg_.p_cancel && try_cancel()) {
      // done
    } else if (u < cfg_.p_cancel + cfg_.p_market) {
      marketable_order();
    } else {
      passive_limit();
    }
    replenish();
  }

  bool try_cancel() {
    // Prune ids that were filled since we remembered them; once in a while
    // emit the cancel anyway, the way real cancels lose races to fills.
    while (!live_.empty()) {
      const std::size_t pick = rng_.bounded(live_.size());
      const OrderId id = live_[pick];
      live_[pick] = live_.back();
      live_.pop_back();
      if (book_.contains(id) || rng_.bernoulli(0.02)) {
        emit_cancel(id);
        return true;
      }
    }
    return false;
  }

  void passive_limit() {
    const Side side = rng_.bernoulli(0.5) ? Side::buy : Side::sell;
    const int offset = rng_.geometric(cfg_.placement_geometric_p);
    if (side == Side::buy) {
      const Tick ask = book_.best_ask() ? *book_.best_ask() : cfg_.initial_mid + 1;
      emit_submit(Side::buy, std::max<Tick>(1, ask - 1 - offset), draw_size());
    } else {
      const Tick bid = book_.best_bid() ? *book_.best_bid() : cfg_.initial_mid - 1;
      emit_submit(Side::sell, bid + 1 + offset, draw_size());
    }
  }

  void marketable_order() {
    const Side side = rng_.bernoulli(0.5) ? Side::buy : Side::sell;
    const auto snap = book_.snapshot(5);
    if (!snap) {
      passive_limit();
      return;
    }
    const auto& prices = side == Side::sell ? snap->bid_price : snap->ask_price;
    const auto& volumes = side == Side::sell ? snap->bid_volume : snap->ask_volume;
    std::size_t reach = 1;
    if (rng_.bernoulli(cfg_.deep_sweep_p))
      reach = 1 + rng_.bounded(std::min<std::size_t>(prices.size(), 4));
    const Tick limit = prices[reach - 1];
    Units cum = 0;
    for (std::size_t i = 0; i < reach; ++i) cum += volumes[i];
    Units size;
    if (rng_.bernoulli(cfg_.partial_p)) {
      size = cum + 1 + static_cast<Units>(rng_.bounded(8));  // overshoots: PS/PB
    } else {
      size = 1 + static_cast<Units>(rng_.bounded(static_cast<std::uint64_t>(cum)));  // FS/FB
    }
    emit_submit(side, limit, size);
  }

  FlowConfig cfg_;
  Rng rng_;
  Timestamp now_;
  OrderBook book_;
  std::vector<OrderId> live_;
  std::vector<OrderEvent> events_;
  Seq next_seq_ = 1;
  OrderId next_id_ = 1;
  bool done_ = false;
};

}  // namespace

std::vector<OrderEvent> zero_intelligence_flow(const FlowConfig& config) {
  return FlowBuilder(config).run();
}

// ---------------------------------------------------------------------------
// Generative observations
// ---------------------------------------------------------------------------

TruthParams TruthParams::for_levels(int levels, ModelKind kind) {
  TruthParams t;
  t.kind = kind;
  t.levels = levels;
  const std::vector<double> c{-1.5, -0.4, 0.15, 0.1, -0.05};
  const std::vector<double> d{0.9, 0.3, -0.1, 0.05, 0.2};
  const std::vector<double> e{1.2, 0.6, 0.3, -0.2, -0.1};
  const std::vector<double> f{-0.8, -0.5, 0.2, 0.1, -0.3};
  auto take = [&](const std::vector<double>& src) {
    std::vector<double> out;
    for (int i = 0; i < levels; ++i) out.push_back(src[static_cast<std::size_t>(i) % src.size()]);
    return out;
  };
  t.c = take(c);
  t.d = take(d);
  t.e = take(e);
  t.f = take(f);
  return t;
}

GeneratedObservations model_observations(const ObsConfig& config) {
  const TruthParams& truth = config.truth;
  const int L = truth.levels;
  if (static_cast<int>(truth.c.size()) != L || static_cast<int>(truth.d.size()) != L ||
      static_cast<int>(truth.e.size()) != L || static_cast<int>(truth.f.size()) != L)
    throw std::invalid_argument("truth coefficient vectors must have L entries");

  Rng rng(config.seed);
  GeneratedObservations out;
  out.truth = truth;
  out.rows.reserve(static_cast<std::size_t>(config.n));

  auto depth_value = [&](double v) {
    return truth.kind == ModelKind::power_law ? std::pow(v, truth.beta) : std::log(v);
  };

  for (int i = 0; i < config.n; ++i) {
    ImpactObservation o;
    if (config.omega_lattice > 0) {
      o.omega_raw = rng.uniform_int(1, config.omega_lattice);
      o.omega_norm = static_cast<double>(o.omega_raw) /
                     ((static_cast<double>(config.omega_lattice) + 1.0) / 2.0);
    } else {
      o.omega_norm = rng.lognormal(0.0, config.omega_sigma);
      o.omega_raw = std::max<std::int64_t>(1, std::llround(o.omega_norm * config.omega_scale));
    }
    o.spread = rng.uniform(config.spread_range.first, config.spread_range.second);
    auto draw_depth = [&] {
      if (config.depth_uniform)
        return rng.uniform(config.depth_uniform->first, config.depth_uniform->second);
      return rng.lognormal(0.0, config.depth_sigma);
    };
    o.ask_depth.resize(L);
    o.bid_depth.resize(L);
    o.ask_gap.resize(L);
    o.bid_gap.resize(L);
    for (int l = 0; l < L; ++l) o.ask_depth[l] = draw_depth();
    for (int l = 0; l < L; ++l) o.bid_depth[l] = draw_depth();
    for (int l = 0; l < L; ++l) o.ask_gap[l] = rng.lognormal(0.0, config.gap_sigma);
    for (int l = 0; l < L; ++l) o.bid_gap[l] = rng.lognormal(0.0, config.gap_sigma);
    o.bucket = static_cast<int>(rng.bounded(kIntradayBuckets));
    o.bucket_share[o.bucket] = 1.0;

    double v = truth.a0 + truth.a * std::pow(o.omega_norm, truth.alpha) + truth.b * o.spread;
    for (int l = 0; l < L; ++l) {
      v += truth.c[l] * depth_value(o.ask_depth[l]);
      v += truth.d[l] * depth_value(o.bid_depth[l]);
      v += truth.e[l] * o.ask_gap[l];
      v += truth.f[l] * o.bid_gap[l];
    }
    v += truth.g[o.bucket];
    if (truth.noise_sigma > 0.0) v += truth.noise_sigma * rng.normal();
    o.r_norm = v;
    o.weight = 1.0;
    out.rows.push_back(std::move(o));
  }
  return out;
}

std::vector<double> truth_coefficients(const TruthParams& truth, bool include_dummies) {
  std::vector<double> coef{truth.a0, truth.a, truth.b};
  coef.insert(coef.end(), truth.c.begin(), truth.c.end());
  coef.insert(coef.end(), truth.d.begin(), truth.d.end());
  coef.insert(coef.end(), truth.e.begin(), truth.e.end());
  coef.insert(coef.end(), truth.f.begin(), truth.f.end());
  if (include_dummies)
    for (int b = 1; b < kIntradayBuckets; ++b) coef.push_back(truth.g[b]);
  return coef;
}

}  // namespace impactlab
