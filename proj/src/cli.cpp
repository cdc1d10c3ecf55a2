#include "impactlab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "impactlab/features.hpp"
#include "impactlab/order_flow.hpp"
#include "impactlab/regression.hpp"
#include "impactlab/report.hpp"
#include "impactlab/synth.hpp"
#include "impactlab/trades.hpp"

namespace impactlab {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::vector<std::string> inputs;
  std::string out_dir = "impactlab_out";
  int levels = 5;
  std::string model = "pl";  // pl | ln | both
  double grid_step = 0.05;
  bool aggregate = true;
  std::string norm = "rel";  // rel | raw
  double alpha_level = 0.05;
  std::uint64_t seed = 1;
  std::string tick_size = "0.01";
  Units lot_size = 1;
  bool dummies = true;
  bool weighted = false;
  std::string grid_exec = "par";  // par | ser
  bool pooled = false;

  // synth options
  std::string synth_kind = "flow";  // flow | obs | scenario
  std::string scenario = "fig1_ps";
  int synth_events = 20000;
  int synth_n = 10000;
  std::string synth_instrument = "SYN001";
  std::string synth_type = "FB";
  double alpha_star = 0.55;
  double beta_star = 0.10;
  double noise_sigma = 0.05;
  double depth_lo = 0.0;  // both > 0: uniform depth draws instead of lognormal
  double depth_hi = 0.0;

  InstrumentConfig instrument_cfg() const {
    return InstrumentConfig{Decimal::parse(tick_size), lot_size};
  }
  SpreadMode spread_mode() const {
    return norm == "raw" ? SpreadMode::raw : SpreadMode::relative;
  }
  GridExecution execution() const {
    return grid_exec == "ser" ? GridExecution::serial : GridExecution::parallel;
  }
  std::vector<ModelKind> model_kinds() const {
    if (model == "both") return {ModelKind::power_law, ModelKind::logarithmic};
    return {model == "ln" ? ModelKind::logarithmic : ModelKind::power_law};
  }
  ModelSpec model_spec(ModelKind kind) const {
    ModelSpec spec;
    spec.kind = kind;
    spec.levels = levels;
    spec.alpha_grid = ModelSpec::grid_from_step(grid_step);
    spec.beta_grid = spec.alpha_grid;
    spec.include_dummies = dummies;
    spec.weighted = weighted;
    return spec;
  }
};

// Provenance hash over the computational configuration; the output directory
// is deliberately excluded so reruns into different locations stay
// byte-identical.
std::string config_hash(const std::string& subcommand, const RunConfig& cfg) {
  std::string canon = "cmd=" + subcommand;
  canon += ";inputs=";
  for (const auto& in : cfg.inputs) canon += in + "|";
  canon += ";levels=" + std::to_string(cfg.levels);
  canon += ";model=" + cfg.model;
  canon += ";grid_step=" + std::to_string(cfg.grid_step);
  canon += ";agg=" + std::to_string(cfg.aggregate);
  canon += ";norm=" + cfg.norm;
  canon += ";alpha_level=" + std::to_string(cfg.alpha_level);
  canon += ";seed=" + std::to_string(cfg.seed);
  canon += ";tick=" + cfg.tick_size;
  canon += ";lot=" + std::to_string(cfg.lot_size);
  canon += ";dummies=" + std::to_string(cfg.dummies);
  canon += ";weighted=" + std::to_string(cfg.weighted);
  canon += ";pooled=" + std::to_string(cfg.pooled);
  canon += ";synth=" + cfg.synth_kind + "," + cfg.scenario + "," +
           std::to_string(cfg.synth_events) + "," + std::to_string(cfg.synth_n) + "," +
           cfg.synth_instrument + "," + cfg.synth_type + "," + std::to_string(cfg.alpha_star) +
           "," + std::to_string(cfg.beta_star) + "," + std::to_string(cfg.noise_sigma) +
           "," + std::to_string(cfg.depth_lo) + "," + std::to_string(cfg.depth_hi);
  return hash_hex(fnv1a64(canon));
}

struct ArtifactLog {
  fs::path root;
  std::string hash;
  std::vector<std::string> paths;

  fs::path emit(const std::string& rel) {
    paths.push_back(rel);
    const fs::path full = root / rel;
    fs::create_directories(full.parent_path());
    return full;
  }

  void finish(const std::string& subcommand) {
    std::sort(paths.begin(), paths.end());
    nlohmann::json manifest;
    manifest["config_hash"] = hash;
    manifest["subcommand"] = subcommand;
    manifest["artifacts"] = paths;
    std::ofstream m(root / "manifest.json");
    m << manifest.dump(2) << '\n';

    nlohmann::json meta;
    meta["config_hash"] = hash;
    const auto now = std::chrono::system_clock::now();
    meta["wall_clock"] = std::chrono::duration_cast<std::chrono::seconds>(
                             now.time_since_epoch())
                             .count();
    std::ofstream mm(root / "run_meta.json");
    mm << meta.dump(2) << '\n';
  }
};

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw StreamError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Pipeline stages
// ---------------------------------------------------------------------------

struct InstrumentData {
  std::string instrument;
  std::vector<TradeRecord> trades;
  ReplayCounters replay_counters;
  StockStats stats;
  std::array<FeatureTable, kTradeTypes> features;
  FeatureCounters feature_counters;
};

std::vector<InstrumentData> replay_inputs(const RunConfig& cfg) {
  std::vector<OrderEvent> events;
  for (const std::string& input : cfg.inputs) {
    OrderFlowReader reader(input, cfg.instrument_cfg());
    OrderEvent e;
    while (reader.next(e)) events.push_back(std::move(e));
  }
  auto by_instrument = split_by_instrument(std::move(events));

  std::vector<std::string> names;
  names.reserve(by_instrument.size());
  for (const auto& [name, _] : by_instrument) names.push_back(name);
  std::sort(names.begin(), names.end());

  std::vector<InstrumentData> out(names.size());
  // Snapshot depth L+1: the L-th gap needs the level beyond it.
  const auto depth = static_cast<std::size_t>(cfg.levels) + 1;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(effective_threads())
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(names.size()); ++i) {
    InstrumentData& data = out[static_cast<std::size_t>(i)];
    data.instrument = names[static_cast<std::size_t>(i)];
    Replayer replayer(data.instrument, depth);
    data.trades = replayer.replay(by_instrument.at(data.instrument));
    data.replay_counters = replayer.counters();
    data.stats = compute_stock_stats(data.instrument, data.trades);
    data.features =
        build_feature_tables(data.instrument, data.trades, cfg.levels, cfg.spread_mode(),
                             cfg.instrument_cfg(), data.stats, data.feature_counters);
  }
  return out;
}

// Feature-store directory input: <inst>_stats.json sidecars plus
// <inst>_<TYPE>.csv tables written by `extract`.
std::vector<InstrumentData> read_feature_store(const fs::path& dir, const RunConfig& cfg) {
  std::vector<InstrumentData> out;
  std::vector<fs::path> sidecars;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 11 && name.compare(name.size() - 11, 11, "_stats.json") == 0)
      sidecars.push_back(entry.path());
  }
  std::sort(sidecars.begin(), sidecars.end());
  for (const fs::path& sidecar : sidecars) {
    std::ifstream in(sidecar);
    nlohmann::json j;
    in >> j;
    InstrumentData data;
    data.instrument = j.at("instrument").get<std::string>();
    const int levels = j.at("levels").get<int>();
    if (levels != cfg.levels)
      throw StreamError("feature store " + sidecar.string() + " was extracted at L=" +
                        std::to_string(levels) + ", run requested L=" +
                        std::to_string(cfg.levels));
    const std::string mode = j.value("norm", "rel");
    if (mode != cfg.norm)
      throw StreamError("feature store " + sidecar.string() + " was extracted with --norm " +
                        mode + ", run requested --norm " + cfg.norm);
    for (int k = 0; k < kTradeTypes; ++k) {
      const auto type = static_cast<TradeType>(k);
      const fs::path csv = dir / feature_csv_name(data.instrument, type);
      FeatureTable& table = data.features[k];
      if (!fs::exists(csv)) {
        table.instrument = data.instrument;
        table.type = type;
        table.levels = cfg.levels;
        continue;
      }
      const auto& ts = j.at("per_type").at(to_string(type));
      table = read_feature_csv(csv.string(), data.instrument, type, cfg.levels,
                               cfg.spread_mode(), ts.at("mean_omega").get<double>(),
                               ts.at("mean_r").get<double>());
    }
    out.push_back(std::move(data));
  }
  return out;
}

std::vector<InstrumentData> load_inputs(const RunConfig& cfg) {
  if (cfg.inputs.empty()) throw StreamError("no --input given");
  if (cfg.inputs.size() == 1 && fs::is_directory(cfg.inputs.front()))
    return read_feature_store(cfg.inputs.front(), cfg);
  for (const std::string& input : cfg.inputs)
    if (fs::is_directory(input))
      throw StreamError("feature-store directory must be the only input: " + input);
  return replay_inputs(cfg);
}

std::vector<ImpactObservation> observations_for_fit(const FeatureTable& table,
                                                    const RunConfig& cfg) {
  if (!cfg.aggregate) return table.rows;
  return aggregate_by_size(table.rows);
}

CalibrationResult calibrate_one(std::vector<ImpactObservation> obs, const std::string& instrument,
                                TradeType type, ModelKind kind, const RunConfig& cfg) {
  CalibrationResult result = grid_calibrate(obs, cfg.model_spec(kind), cfg.execution());
  result.instrument = instrument;
  result.type = type;
  return result;
}

std::string calib_file_stem(const std::string& instrument, TradeType type, ModelKind kind) {
  return instrument + "_" + to_string(type) + "_" +
         (kind == ModelKind::power_law ? "pl" : "ln");
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void cmd_replay(const RunConfig& cfg, ArtifactLog& log) {
  const auto data = replay_inputs(cfg);
  for (const InstrumentData& d : data) {
    const auto path = log.emit("trades/" + d.instrument + "_trades.csv");
    write_trades_csv(path.string(), d.trades, cfg.instrument_cfg());
    const auto meta = log.emit("trades/" + d.instrument + "_replay.json");
    nlohmann::json j = stats_to_json(d.stats, &d.replay_counters, nullptr);
    j["config_hash"] = log.hash;
    write_json(meta, j);
  }
}

void cmd_stats(const RunConfig& cfg, ArtifactLog& log) {
  const auto data = replay_inputs(cfg);
  std::vector<StockStats> stats;
  for (const InstrumentData& d : data) stats.push_back(d.stats);
  write_stats_csv(log.emit("stats/stats.csv").string(), stats);
  for (const InstrumentData& d : data) {
    nlohmann::json j = stats_to_json(d.stats, &d.replay_counters, nullptr);
    j["config_hash"] = log.hash;
    write_json(log.emit("stats/" + d.instrument + ".json"), j);
  }
}

void cmd_extract(const RunConfig& cfg, ArtifactLog& log) {
  const auto data = replay_inputs(cfg);
  for (const InstrumentData& d : data) {
    for (const FeatureTable& table : d.features) {
      if (table.rows.empty()) continue;
      const auto path = log.emit("features/" + feature_csv_name(d.instrument, table.type));
      write_feature_csv(path.string(), table);
    }
    nlohmann::json j = stats_to_json(d.stats, &d.replay_counters, &d.feature_counters);
    j["config_hash"] = log.hash;
    j["levels"] = cfg.levels;
    j["norm"] = cfg.norm;
    j["tick_size"] = cfg.tick_size;
    write_json(log.emit("features/" + d.instrument + "_stats.json"), j);
  }
}

void write_calibration(const CalibrationResult& result, const std::string& dir,
                       ArtifactLog& log) {
  const std::string stem = calib_file_stem(result.instrument, result.type, result.kind);
  write_json(log.emit(dir + "/" + stem + ".json"), calibration_to_json(result, log.hash));
  write_grid_trace_tsv(log.emit(dir + "/" + stem + "_grid.tsv").string(), result);
}

void cmd_calibrate(const RunConfig& cfg, ArtifactLog& log) {
  const auto data = load_inputs(cfg);
  nlohmann::json skipped = nlohmann::json::array();
  for (const InstrumentData& d : data) {
    for (const FeatureTable& table : d.features) {
      for (const ModelKind kind : cfg.model_kinds()) {
        try {
          auto result =
              calibrate_one(observations_for_fit(table, cfg), d.instrument, table.type, kind, cfg);
          write_calibration(result, "calib", log);
        } catch (const CalibrationError& e) {
          skipped.push_back({{"instrument", d.instrument},
                             {"type", to_string(table.type)},
                             {"model", to_string(kind)},
                             {"reason", e.what()}});
        }
      }
    }
  }
  if (!skipped.empty())
    write_json(log.emit("calib/skipped.json"),
               nlohmann::json{{"config_hash", log.hash}, {"skipped", skipped}});
}

std::array<std::vector<ImpactObservation>, kTradeTypes> pooled_observations(
    const std::vector<InstrumentData>& data, const RunConfig& cfg) {
  std::array<std::vector<ImpactObservation>, kTradeTypes> pooled;
  for (const InstrumentData& d : data)
    for (int k = 0; k < kTradeTypes; ++k) {
      const auto obs = observations_for_fit(d.features[k], cfg);
      pooled[k].insert(pooled[k].end(), obs.begin(), obs.end());
    }
  return pooled;
}

void cmd_pool(const RunConfig& cfg, ArtifactLog& log) {
  const auto data = load_inputs(cfg);
  auto pooled = pooled_observations(data, cfg);
  nlohmann::json skipped = nlohmann::json::array();
  for (int k = 0; k < kTradeTypes; ++k) {
    for (const ModelKind kind : cfg.model_kinds()) {
      try {
        CalibrationResult result = grid_calibrate(pooled[k], cfg.model_spec(kind),
                                                  cfg.execution());
        result.instrument = "POOLED";
        result.type = static_cast<TradeType>(k);
        write_calibration(result, "pooled", log);
      } catch (const CalibrationError& e) {
        skipped.push_back({{"type", to_string(static_cast<TradeType>(k))},
                           {"model", to_string(kind)},
                           {"reason", e.what()}});
      }
    }
  }
  if (!skipped.empty())
    write_json(log.emit("pooled/skipped.json"),
               nlohmann::json{{"config_hash", log.hash}, {"skipped", skipped}});
}

void compare_on(const std::vector<ImpactObservation>& obs, const std::string& instrument,
                TradeType type, const RunConfig& cfg, ArtifactLog& log,
                nlohmann::json& skipped) {
  try {
    CalibrationResult pl = grid_calibrate(obs, cfg.model_spec(ModelKind::power_law),
                                          cfg.execution());
    pl.instrument = instrument;
    pl.type = type;
    CalibrationResult ln = grid_calibrate(obs, cfg.model_spec(ModelKind::logarithmic),
                                          cfg.execution());
    ln.instrument = instrument;
    ln.type = type;
    const TaylorLinkage link = taylor_linkage(pl, ln);
    write_calibration(pl, "compare", log);
    write_calibration(ln, "compare", log);
    const std::string stem = instrument + "_" + to_string(type);
    write_json(log.emit("compare/" + stem + "_linkage.json"),
               linkage_to_json(link, pl, ln, log.hash));
    write_linkage_tsv(log.emit("compare/" + stem + "_linkage.tsv").string(), link);
  } catch (const CalibrationError& e) {
    skipped.push_back(
        {{"instrument", instrument}, {"type", to_string(type)}, {"reason", e.what()}});
  }
}

void cmd_compare(const RunConfig& cfg, ArtifactLog& log) {
  const auto data = load_inputs(cfg);
  nlohmann::json skipped = nlohmann::json::array();
  if (cfg.pooled) {
    auto pooled = pooled_observations(data, cfg);
    for (int k = 0; k < kTradeTypes; ++k)
      compare_on(pooled[k], "POOLED", static_cast<TradeType>(k), cfg, log, skipped);
  } else {
    for (const InstrumentData& d : data)
      for (const FeatureTable& table : d.features)
        compare_on(observations_for_fit(table, cfg), d.instrument, table.type, cfg, log,
                   skipped);
  }
  if (!skipped.empty())
    write_json(log.emit("compare/skipped.json"),
               nlohmann::json{{"config_hash", log.hash}, {"skipped", skipped}});
}

void cmd_synth(const RunConfig& cfg, ArtifactLog& log) {
  if (cfg.synth_kind == "flow") {
    FlowConfig flow;
    flow.seed = cfg.seed;
    flow.instrument = cfg.synth_instrument;
    flow.events = cfg.synth_events;
    flow.instrument_cfg = cfg.instrument_cfg();
    const auto events = zero_intelligence_flow(flow);
    const auto path = log.emit("flow_" + cfg.synth_instrument + ".csv");
    std::ofstream out(path);
    out << kOrderFlowHeader << '\n';
    for (const OrderEvent& e : events) out << format_event(e, flow.instrument_cfg) << '\n';
  } else if (cfg.synth_kind == "obs") {
    ObsConfig obs_cfg;
    obs_cfg.seed = cfg.seed;
    obs_cfg.n = cfg.synth_n;
    obs_cfg.truth = TruthParams::for_levels(cfg.levels);
    obs_cfg.truth.alpha = cfg.alpha_star;
    obs_cfg.truth.beta = cfg.beta_star;
    obs_cfg.truth.noise_sigma = cfg.noise_sigma;
    if (cfg.depth_lo > 0.0 && cfg.depth_hi > cfg.depth_lo)
      obs_cfg.depth_uniform = {cfg.depth_lo, cfg.depth_hi};
    const auto generated = model_observations(obs_cfg);

    const auto type = trade_type_from_string(cfg.synth_type);
    if (!type) throw StreamError("bad synth trade type: " + cfg.synth_type);
    FeatureTable table;
    table.instrument = cfg.synth_instrument;
    table.type = *type;
    table.levels = cfg.levels;
    table.mode = cfg.spread_mode();
    table.mean_omega = obs_cfg.omega_scale;
    table.mean_r = 1.0;
    table.rows = generated.rows;
    write_feature_csv(
        log.emit("observations/" + feature_csv_name(cfg.synth_instrument, *type)).string(),
        table);

    nlohmann::json truth;
    truth["config_hash"] = log.hash;
    truth["model"] = to_string(generated.truth.kind);
    truth["levels"] = generated.truth.levels;
    truth["alpha"] = generated.truth.alpha;
    truth["beta"] = generated.truth.beta;
    truth["noise_sigma"] = generated.truth.noise_sigma;
    truth["coefficients"] = truth_coefficients(generated.truth, false);
    write_json(log.emit("observations/truth.json"), truth);

    // Sidecar so the observations directory doubles as a feature store.
    StockStats stats;
    stats.instrument = cfg.synth_instrument;
    stats.n_trades = generated.rows.size();
    auto& ts = stats.per_type[static_cast<int>(*type)];
    ts.count = generated.rows.size();
    ts.mean_r = 1.0;
    ts.mean_omega = obs_cfg.omega_scale;
    ts.zero_return_fraction = 0.0;
    nlohmann::json sidecar = stats_to_json(stats, nullptr, nullptr);
    sidecar["config_hash"] = log.hash;
    sidecar["levels"] = cfg.levels;
    sidecar["norm"] = cfg.norm;
    sidecar["tick_size"] = cfg.tick_size;
    write_json(log.emit("observations/" + cfg.synth_instrument + "_stats.json"), sidecar);
  } else if (cfg.synth_kind == "scenario") {
    const ScriptedScenario s = scripted_scenario(cfg.scenario);
    const auto path = log.emit("scenario_" + s.name + ".csv");
    std::ofstream out(path);
    out << kOrderFlowHeader << '\n';
    Timestamp t{2003, 6, 2, hms_to_sec(9, 30, 0)};
    Seq seq = 1;
    OrderId id = 1;
    const auto icfg = cfg.instrument_cfg();
    for (const BookOrder& b : s.book) {
      OrderEvent e;
      e.timestamp = t;
      e.seq = seq++;
      e.action = Action::submit;
      e.side = b.side;
      e.price = b.price;
      e.size = b.size;
      e.order_id = "s" + std::to_string(id++);
      e.instrument = cfg.synth_instrument;
      out << format_event(e, icfg) << '\n';
    }
    OrderEvent incoming;
    incoming.timestamp = Timestamp{2003, 6, 2, hms_to_sec(9, 30, 1)};
    incoming.seq = seq;
    incoming.action = Action::submit;
    incoming.side = s.incoming_side;
    incoming.price = s.limit_price;
    incoming.size = s.size;
    incoming.order_id = "incoming";
    incoming.instrument = cfg.synth_instrument;
    out << format_event(incoming, icfg) << '\n';

    nlohmann::json j;
    j["config_hash"] = log.hash;
    j["name"] = s.name;
    j["expected"] = {{"type", to_string(s.expected.kind)},
                     {"levels", s.expected.levels_reached},
                     {"omega", s.expected.executed},
                     {"remainder", s.expected.remainder},
                     {"r_num", s.expected.impact.num},
                     {"r_den", s.expected.impact.den},
                     {"r", s.expected.impact.value()}};
    write_json(log.emit("scenario_" + s.name + ".json"), j);
  } else {
    throw StreamError("unknown synth kind: " + cfg.synth_kind);
  }
}

void cmd_report(const RunConfig& cfg, ArtifactLog& log) {
  // Inputs are calibration JSONs or directories containing them.
  std::vector<fs::path> files;
  for (const std::string& input : cfg.inputs) {
    if (fs::is_directory(input)) {
      for (const auto& entry : fs::recursive_directory_iterator(input)) {
        const std::string name = entry.path().filename().string();
        if (entry.path().extension() == ".json" && name != "skipped.json" &&
            name.find("linkage") == std::string::npos && name != "manifest.json" &&
            name != "run_meta.json" && name != "truth.json" &&
            name.find("_stats") == std::string::npos &&
            name.find("_replay") == std::string::npos)
          files.push_back(entry.path());
      }
    } else {
      files.push_back(input);
    }
  }
  std::sort(files.begin(), files.end());

  // Group results by model kind and level count; each group gets its own
  // significance matrix and asymmetry table.
  std::map<std::pair<std::string, int>, std::vector<CalibrationResult>> groups;
  for (const fs::path& file : files) {
    std::ifstream in(file);
    nlohmann::json j;
    in >> j;
    CalibrationResult r = calibration_from_json(j);
    groups[{std::string(to_string(r.kind)), r.levels}].push_back(std::move(r));
  }
  if (groups.empty()) throw StreamError("report: no calibration results found");

  for (const auto& [key, results] : groups) {
    const std::string stem = key.first + "_L" + std::to_string(key.second);
    const auto cells = significance_pattern(results, cfg.alpha_level);
    write_significance_csv(log.emit("report/significance_" + stem + ".csv").string(), cells);
    write_significance_matrix_tsv(
        log.emit("report/significance_" + stem + ".tsv").string(), cells);
    const auto rows = asymmetry_compare(results);
    write_asymmetry_csv(log.emit("report/asymmetry_" + stem + ".csv").string(), rows);
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"limit order book replay and immediate price impact calibration"};
  app.set_config("--config", "", "flat key=value config file; flags override");

  app.add_option("--input", cfg.inputs, "order-flow CSV(s) (.gz ok) or a feature-store dir");
  app.add_option("--out", cfg.out_dir, "output directory");
  app.add_option("--levels", cfg.levels, "book levels L in the regressor set")
      ->check(CLI::PositiveNumber);
  app.add_option("--model", cfg.model, "pl | ln | both")
      ->check(CLI::IsMember({"pl", "ln", "both"}));
  app.add_option("--grid-step", cfg.grid_step, "exponent grid step in (0,1)");
  app.add_flag("--agg,!--no-agg", cfg.aggregate, "aggregate trades of equal size");
  app.add_option("--norm", cfg.norm, "spread/gap units: rel | raw")
      ->check(CLI::IsMember({"rel", "raw"}));
  app.add_option("--alpha-level", cfg.alpha_level, "significance level");
  app.add_option("--seed", cfg.seed, "generator seed");
  app.add_option("--tick-size", cfg.tick_size, "price tick, decimal string");
  app.add_option("--lot-size", cfg.lot_size, "volume lot");
  app.add_flag("--dummies,!--no-dummies", cfg.dummies, "include intraday dummies");
  app.add_flag("--weighted,!--unweighted", cfg.weighted, "weight aggregated rows by group size");
  app.add_option("--grid-exec", cfg.grid_exec, "grid scan execution: par | ser")
      ->check(CLI::IsMember({"par", "ser"}));
  app.add_flag("--pooled", cfg.pooled, "compare on pooled observations");

  app.require_subcommand(1);
  app.add_subcommand("replay", "order flow -> trades CSV");
  app.add_subcommand("stats", "per-stock trade statistics");
  app.add_subcommand("extract", "order flow -> feature store");
  app.add_subcommand("calibrate", "per instrument x type calibration");
  app.add_subcommand("pool", "cross-sectional calibration over all instruments");
  app.add_subcommand("compare", "power-law vs logarithmic + linkage");
  auto* sub_synth = app.add_subcommand("synth", "synthetic data generators");
  app.add_subcommand("report", "significance matrices and plot data");

  sub_synth->add_option("--kind", cfg.synth_kind, "flow | obs | scenario")
      ->check(CLI::IsMember({"flow", "obs", "scenario"}));
  sub_synth->add_option("--scenario", cfg.scenario, "scripted scenario name");
  sub_synth->add_option("--events", cfg.synth_events, "flow event count");
  sub_synth->add_option("--n", cfg.synth_n, "observation count");
  sub_synth->add_option("--instrument", cfg.synth_instrument, "synthetic instrument code");
  sub_synth->add_option("--trade-type", cfg.synth_type, "observation trade type");
  sub_synth->add_option("--alpha-star", cfg.alpha_star, "generative alpha");
  sub_synth->add_option("--beta-star", cfg.beta_star, "generative beta");
  sub_synth->add_option("--noise-sigma", cfg.noise_sigma, "generative noise sigma");
  sub_synth->add_option("--depth-lo", cfg.depth_lo, "uniform depth lower bound (0: lognormal)");
  sub_synth->add_option("--depth-hi", cfg.depth_hi, "uniform depth upper bound");

  std::vector<std::string> argv_store;
  argv_store.push_back("impactlab");
  for (const auto& a : args) argv_store.push_back(a);
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      return app.exit(e);
    }
    nlohmann::json err;
    err["error"] = {{"type", "usage"}, {"message", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 2;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  try {
    ArtifactLog log;
    log.root = cfg.out_dir;
    log.hash = config_hash(subcommand, cfg);
    fs::create_directories(log.root);

    if (subcommand == "replay")
      cmd_replay(cfg, log);
    else if (subcommand == "stats")
      cmd_stats(cfg, log);
    else if (subcommand == "extract")
      cmd_extract(cfg, log);
    else if (subcommand == "calibrate")
      cmd_calibrate(cfg, log);
    else if (subcommand == "pool")
      cmd_pool(cfg, log);
    else if (subcommand == "compare")
      cmd_compare(cfg, log);
    else if (subcommand == "synth")
      cmd_synth(cfg, log);
    else if (subcommand == "report")
      cmd_report(cfg, log);

    log.finish(subcommand);
    return 0;
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = {{"type", typeid(e).name()}, {"message", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace impactlab
