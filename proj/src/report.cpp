#include "impactlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

namespace impactlab {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw StreamError("cannot write " + path);
  return out;
}

nlohmann::json num_or_null(double v) {
  if (std::isnan(v) || std::isinf(v)) return nullptr;
  return v;
}

double json_num(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void write_stats_csv(const std::string& path, std::span<const StockStats> stats) {
  auto out = open_out(path);
  out << "code,r_PB,r_PS,r_FB,r_FS,N,F\n";
  for (const StockStats& s : stats) {
    out << s.instrument;
    for (const TradeType t :
         {TradeType::PB, TradeType::PS, TradeType::FB, TradeType::FS}) {
      const TypeStats& ts = s.of(t);
      out << ',' << (ts.present() ? fmt(ts.mean_r) : "");
    }
    out << ',' << s.n_trades << ',' << fmt(s.partial_fraction) << '\n';
  }
}

nlohmann::json stats_to_json(const StockStats& stats, const ReplayCounters* replay,
                             const FeatureCounters* features) {
  nlohmann::json per_type;
  for (int k = 0; k < kTradeTypes; ++k) {
    const TypeStats& ts = stats.per_type[k];
    nlohmann::json entry;
    entry["count"] = ts.count;
    entry["mean_r"] = num_or_null(ts.mean_r);
    entry["mean_omega"] = num_or_null(ts.mean_omega);
    entry["zero_return_fraction"] = num_or_null(ts.zero_return_fraction);
    per_type[to_string(static_cast<TradeType>(k))] = std::move(entry);
  }
  nlohmann::json j;
  j["instrument"] = stats.instrument;
  j["n_trades"] = stats.n_trades;
  j["partial_fraction"] = stats.partial_fraction;
  j["symmetry_partial"] = num_or_null(stats.symmetry_partial);
  j["symmetry_filled"] = num_or_null(stats.symmetry_filled);
  j["per_type"] = std::move(per_type);
  if (replay != nullptr) {
    nlohmann::json r;
    r["events"] = replay->events;
    r["trades"] = replay->trades;
    r["resting_submits"] = replay->resting_submits;
    r["cancels"] = replay->cancels;
    r["unknown_cancels"] = replay->unknown_cancels;
    r["rejected"] = replay->rejected;
    r["auction_queued"] = replay->auction_queued;
    r["dropped_out_of_session"] = replay->dropped_out_of_session;
    r["one_sided_skips"] = replay->one_sided_skips;
    j["replay_counters"] = std::move(r);
  }
  if (features != nullptr) {
    nlohmann::json f;
    f["thin_book_skips"] = features->thin_book_skips;
    f["excluded_types"] = features->excluded_types;
    j["feature_counters"] = std::move(f);
  }
  return j;
}

nlohmann::json calibration_to_json(const CalibrationResult& result,
                                   const std::string& config_hash) {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["instrument"] = result.instrument;
  j["trade_type"] = to_string(result.type);
  j["model"] = to_string(result.kind);
  j["levels"] = result.levels;
  j["include_dummies"] = result.include_dummies;
  j["weighted"] = result.weighted;
  j["alpha"] = result.alpha;
  j["beta"] = num_or_null(result.beta);
  j["active_buckets"] = result.active_buckets;
  j["n_obs"] = result.fit.n_obs;
  j["n_params"] = result.fit.n_params;
  j["r2"] = result.fit.r2;
  j["r2_adj"] = result.fit.r2_adj;
  j["f_stat"] = num_or_null(result.fit.f_stat);
  j["f_pvalue"] = num_or_null(result.fit.f_pvalue);
  j["rss"] = result.fit.rss;

  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t i = 0; i < result.column_names.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    nlohmann::json c;
    c["name"] = result.column_names[i];
    c["estimate"] = result.fit.coef(idx);
    c["se"] = result.fit.se(idx);
    c["t"] = result.fit.tstat(idx);
    c["p"] = result.fit.pvalue(idx);
    coefs.push_back(std::move(c));
  }
  j["coefficients"] = std::move(coefs);

  nlohmann::json trace = nlohmann::json::array();
  for (const GridPoint& p : result.trace) {
    nlohmann::json t;
    t["alpha"] = p.alpha;
    t["beta"] = num_or_null(p.beta);
    t["r2_adj"] = p.ok ? nlohmann::json(p.r2_adj) : nlohmann::json(nullptr);
    t["ok"] = p.ok;
    trace.push_back(std::move(t));
  }
  j["grid_trace"] = std::move(trace);
  return j;
}

CalibrationResult calibration_from_json(const nlohmann::json& j) {
  CalibrationResult r;
  r.instrument = j.at("instrument").get<std::string>();
  const auto type = trade_type_from_string(j.at("trade_type").get<std::string>());
  if (!type) throw StreamError("bad trade_type in calibration JSON");
  r.type = *type;
  const auto kind = model_kind_from_string(j.at("model").get<std::string>());
  if (!kind) throw StreamError("bad model in calibration JSON");
  r.kind = *kind;
  r.levels = j.at("levels").get<int>();
  r.include_dummies = j.at("include_dummies").get<bool>();
  r.weighted = j.at("weighted").get<bool>();
  r.alpha = j.at("alpha").get<double>();
  r.beta = json_num(j.at("beta"));
  if (j.contains("active_buckets"))
    r.active_buckets = j.at("active_buckets").get<std::vector<int>>();
  r.fit.n_obs = j.at("n_obs").get<Eigen::Index>();
  r.fit.n_params = j.at("n_params").get<Eigen::Index>();
  r.fit.r2 = j.at("r2").get<double>();
  r.fit.r2_adj = j.at("r2_adj").get<double>();
  r.fit.f_stat = json_num(j.at("f_stat"));
  r.fit.f_pvalue = json_num(j.at("f_pvalue"));
  r.fit.rss = j.at("rss").get<double>();

  const auto& coefs = j.at("coefficients");
  const auto k = static_cast<Eigen::Index>(coefs.size());
  r.fit.coef.resize(k);
  r.fit.se.resize(k);
  r.fit.tstat.resize(k);
  r.fit.pvalue.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& c = coefs[static_cast<std::size_t>(i)];
    r.column_names.push_back(c.at("name").get<std::string>());
    r.fit.coef(i) = c.at("estimate").get<double>();
    r.fit.se(i) = c.at("se").get<double>();
    r.fit.tstat(i) = c.at("t").get<double>();
    r.fit.pvalue(i) = c.at("p").get<double>();
  }

  if (j.contains("grid_trace")) {
    for (const auto& t : j.at("grid_trace")) {
      GridPoint p;
      p.alpha = t.at("alpha").get<double>();
      p.beta = json_num(t.at("beta"));
      p.ok = t.at("ok").get<bool>();
      p.r2_adj = p.ok ? t.at("r2_adj").get<double>()
                      : -std::numeric_limits<double>::infinity();
      r.trace.push_back(p);
    }
  }
  return r;
}

nlohmann::json linkage_to_json(const TaylorLinkage& link, const CalibrationResult& power_law,
                               const CalibrationResult& logarithmic,
                               const std::string& config_hash) {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["instrument"] = power_law.instrument;
  j["trade_type"] = to_string(power_law.type);
  j["levels"] = power_law.levels;
  j["power_law_alpha"] = power_law.alpha;
  j["power_law_beta"] = power_law.beta;
  j["logarithmic_alpha"] = logarithmic.alpha;
  j["slope"] = link.slope;
  j["intercept"] = link.intercept;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [x, y] : link.points) pts.push_back({x, y});
  j["points"] = std::move(pts);
  return j;
}

void write_trades_csv(const std::string& path, std::span<const TradeRecord> trades,
                      const InstrumentConfig& cfg) {
  auto out = open_out(path);
  out << "instrument,timestamp,seq,type,omega,remainder,levels,r,a1_pre,b1_pre,a1_post,b1_post\n";
  for (const TradeRecord& t : trades) {
    out << t.instrument << ',' << format_timestamp(t.timestamp) << ',' << t.seq << ','
        << to_string(t.type) << ',' << t.omega << ',' << t.remainder << ',' << t.levels_touched
        << ',' << fmt(t.r) << ',' << ticks_to_price_string(t.pre.best_ask(), cfg.tick_size)
        << ',' << ticks_to_price_string(t.pre.best_bid(), cfg.tick_size) << ','
        << ticks_to_price_string(t.post.best_ask(), cfg.tick_size) << ','
        << ticks_to_price_string(t.post.best_bid(), cfg.tick_size) << '\n';
  }
}

void write_significance_csv(const std::string& path, std::span<const SignificanceCell> cells) {
  auto out = open_out(path);
  out << "instrument,type,coef,estimate,pvalue,sign,significant\n";
  for (const SignificanceCell& c : cells) {
    out << c.instrument << ',' << to_string(c.type) << ',' << c.coefficient << ','
        << fmt(c.estimate) << ',' << fmt(c.pvalue) << ',' << (c.estimate >= 0 ? '+' : '-')
        << ',' << (c.significant ? 1 : 0) << '\n';
  }
}

void write_significance_matrix_tsv(const std::string& path,
                                   std::span<const SignificanceCell> cells) {
  // Rows are (instrument, type) in input order; columns the union of
  // coefficient names in first-seen order. Results may carry different dummy
  // sets, so cells align by name and absent entries stay blank.
  std::vector<std::pair<std::string, TradeType>> keys;
  std::vector<std::string> coef_order;
  std::map<std::pair<std::string, int>, std::map<std::string, int>> codes;
  for (const SignificanceCell& c : cells) {
    const auto key = std::make_pair(c.instrument, c.type);
    if (keys.empty() || keys.back() != key) keys.push_back(key);
    if (std::find(coef_order.begin(), coef_order.end(), c.coefficient) == coef_order.end())
      coef_order.push_back(c.coefficient);
    codes[{c.instrument, static_cast<int>(c.type)}][c.coefficient] =
        (c.estimate >= 0 ? 1 : -1) * (c.significant ? 2 : 1);
  }
  auto out = open_out(path);
  out << "instrument\ttype";
  for (const auto& name : coef_order) out << '\t' << name;
  out << '\n';
  for (const auto& [instrument, type] : keys) {
    out << instrument << '\t' << to_string(type);
    const auto& row = codes[{instrument, static_cast<int>(type)}];
    for (const auto& name : coef_order) {
      const auto it = row.find(name);
      out << '\t';
      if (it != row.end()) out << it->second;
    }
    out << '\n';
  }
}

void write_asymmetry_csv(const std::string& path, std::span<const AsymmetryRow> rows) {
  auto out = open_out(path);
  out << "code";
  for (const TradeType t : {TradeType::PB, TradeType::PS, TradeType::FB, TradeType::FS})
    for (const char* coef : kAsymmetryCoefficients) out << ',' << to_string(t) << "_" << coef;
  out << '\n';
  for (const AsymmetryRow& row : rows) {
    out << row.instrument;
    for (const TradeType t : {TradeType::PB, TradeType::PS, TradeType::FB, TradeType::FS}) {
      const auto& mags = row.magnitude[static_cast<int>(t)];
      for (double m : mags) out << ',' << (std::isnan(m) ? "" : fmt(m));
    }
    out << '\n';
  }
}

void write_grid_trace_tsv(const std::string& path, const CalibrationResult& result) {
  auto out = open_out(path);
  out << "alpha\tbeta\tr2_adj\n";
  for (const GridPoint& p : result.trace) {
    out << fmt(p.alpha) << '\t' << (std::isnan(p.beta) ? "" : fmt(p.beta)) << '\t'
        << (p.ok ? fmt(p.r2_adj) : "") << '\n';
  }
}

void write_linkage_tsv(const std::string& path, const TaylorLinkage& link) {
  auto out = open_out(path);
  out << "x\ty\n";
  for (const auto& [x, y] : link.points) out << fmt(x) << '\t' << fmt(y) << '\n';
}

}  // namespace impactlab
