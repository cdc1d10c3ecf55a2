#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "impactlab/cli.hpp"
#include "impactlab/features.hpp"
#include "impactlab/regression.hpp"
#include "impactlab/report.hpp"

using namespace impactlab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "impactlab_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

nlohmann::json load_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  return j;
}

// One small flow file shared by the pipeline tests.
const fs::path& flow_file() {
  static const fs::path path = [] {
    const fs::path dir = fresh_dir("flow");
    REQUIRE(run_cli({"--out", dir.string(), "--seed", "12", "synth", "--kind", "flow",
                     "--events", "6000"}) == 0);
    return dir / "flow_SYN001.csv";
  }();
  return path;
}

}  // namespace

TEST_CASE("synth flow emits a replayable order-flow file") {
  const std::string head = slurp(flow_file()).substr(0, std::string(kOrderFlowHeader).size());
  CHECK(head == kOrderFlowHeader);

  const fs::path out = fresh_dir("replay");
  REQUIRE(run_cli({"--input", flow_file().string(), "--out", out.string(), "replay"}) == 0);
  CHECK(fs::exists(out / "trades" / "SYN001_trades.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  const auto meta = load_json(out / "trades" / "SYN001_replay.json");
  CHECK(meta.at("n_trades").get<std::size_t>() > 100);
}

TEST_CASE("stats subcommand writes the per-stock table") {
  const fs::path out = fresh_dir("stats");
  REQUIRE(run_cli({"--input", flow_file().string(), "--out", out.string(), "stats"}) == 0);
  const std::string csv = slurp(out / "stats" / "stats.csv");
  CHECK(csv.rfind("code,r_PB,r_PS,r_FB,r_FS,N,F", 0) == 0);
  CHECK(csv.find("SYN001") != std::string::npos);
}

TEST_CASE("extract produces a readable feature store") {
  const fs::path out = fresh_dir("extract");
  REQUIRE(run_cli({"--input", flow_file().string(), "--out", out.string(), "--levels", "2",
                   "extract"}) == 0);
  const fs::path feat = out / "features";
  CHECK(fs::exists(feat / "SYN001_stats.json"));
  const auto sidecar = load_json(feat / "SYN001_stats.json");
  CHECK(sidecar.at("levels").get<int>() == 2);

  int tables = 0;
  for (int k = 0; k < kTradeTypes; ++k) {
    const fs::path csv = feat / feature_csv_name("SYN001", static_cast<TradeType>(k));
    if (!fs::exists(csv)) continue;
    ++tables;
    const auto& ts = sidecar.at("per_type").at(to_string(static_cast<TradeType>(k)));
    const FeatureTable table =
        read_feature_csv(csv.string(), "SYN001", static_cast<TradeType>(k), 2,
                         SpreadMode::relative, ts.at("mean_omega").get<double>(),
                         ts.at("mean_r").get<double>());
    CHECK(!table.rows.empty());
  }
  CHECK(tables >= 2);
}

TEST_CASE("calibrate emits result JSONs that validate and rerun byte-identically") {
  const fs::path out1 = fresh_dir("calib1");
  const fs::path out2 = fresh_dir("calib2");
  const std::vector<std::string> base = {"--input", flow_file().string(), "--levels", "2",
                                         "--model", "pl", "calibrate"};
  auto with_out = [&](const fs::path& out, const std::string& exec) {
    std::vector<std::string> args = {"--out", out.string(), "--grid-exec", exec};
    args.insert(args.end(), base.begin(), base.end());
    return args;
  };
  REQUIRE(run_cli(with_out(out1, "par")) == 0);
  REQUIRE(run_cli(with_out(out2, "ser")) == 0);

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(out1 / "calib")) {
    if (entry.path().extension() != ".json" ||
        entry.path().filename() == "skipped.json")
      continue;
    const fs::path other = out2 / "calib" / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));  // parallel == serial, bytes
    ++compared;

    const auto j = load_json(entry.path());
    for (const char* field : {"config_hash", "instrument", "trade_type", "model", "alpha",
                              "r2_adj", "f_pvalue", "coefficients", "grid_trace", "n_obs"})
      CHECK(j.contains(field));
    const CalibrationResult r = calibration_from_json(j);
    CHECK(r.trace.size() == 361);
    CHECK(r.fit.coef.size() == r.fit.se.size());
  }
  CHECK(compared >= 1);
}

TEST_CASE("pool equals manual concatenation of per-instrument observations") {
  // Two-instrument input: the same flow twice under different codes.
  const fs::path dir = fresh_dir("pool_in");
  const fs::path flow2 = dir / "flow2.csv";
  {
    std::ifstream in(flow_file());
    std::ofstream dup(flow2);
    std::string line;
    std::getline(in, line);
    dup << line << '\n';
    while (std::getline(in, line)) {
      const auto pos = line.rfind("SYN001");
      REQUIRE(pos != std::string::npos);
      dup << line.replace(pos, 6, "SYN002") << '\n';
    }
  }

  const fs::path feat1 = fresh_dir("pool_feat1");
  const fs::path feat2 = fresh_dir("pool_feat2");
  REQUIRE(run_cli({"--input", flow_file().string(), "--out", feat1.string(), "--levels", "2",
                   "extract"}) == 0);
  REQUIRE(run_cli({"--input", flow2.string(), "--out", feat2.string(), "--levels", "2",
                   "extract"}) == 0);
  // One directory with both instruments' tables.
  const fs::path store = fresh_dir("pool_store");
  for (const fs::path& src : {feat1 / "features", feat2 / "features"})
    for (const auto& entry : fs::directory_iterator(src))
      fs::copy_file(entry.path(), store / entry.path().filename());

  const fs::path out = fresh_dir("pool_out");
  REQUIRE(run_cli({"--input", store.string(), "--out", out.string(), "--levels", "2",
                   "--model", "pl", "pool"}) == 0);

  // Manual route: read both instruments' FB tables, aggregate each, then fit
  // the concatenation.
  std::vector<ImpactObservation> manual;
  for (const std::string inst : {"SYN001", "SYN002"}) {
    const auto sidecar = load_json(store / (inst + "_stats.json"));
    const auto& ts = sidecar.at("per_type").at("FB");
    const FeatureTable t =
        read_feature_csv((store / feature_csv_name(inst, TradeType::FB)).string(), inst,
                         TradeType::FB, 2, SpreadMode::relative,
                         ts.at("mean_omega").get<double>(), ts.at("mean_r").get<double>());
    const auto agg = aggregate_by_size(t.rows);
    manual.insert(manual.end(), agg.begin(), agg.end());
  }
  ModelSpec spec;
  spec.levels = 2;
  const CalibrationResult mine = grid_calibrate(manual, spec);

  const auto pooled = load_json(out / "pooled" / "POOLED_FB_pl.json");
  CHECK(pooled.at("alpha").get<double>() == mine.alpha);
  CHECK(pooled.at("beta").get<double>() == mine.beta);
  CHECK(pooled.at("n_obs").get<int>() == mine.fit.n_obs);
  const auto coefs = pooled.at("coefficients");
  for (Eigen::Index j = 0; j < mine.fit.coef.size(); ++j)
    CHECK(coefs[static_cast<std::size_t>(j)].at("estimate").get<double>() ==
          doctest::Approx(mine.fit.coef(j)).epsilon(1e-12));
}

TEST_CASE("compare on small-beta synthetic observations recovers the linkage") {
  const fs::path obs = fresh_dir("obs");
  REQUIRE(run_cli({"--out", obs.string(), "--seed", "4", "--levels", "2", "synth", "--kind",
                   "obs", "--n", "6000", "--alpha-star", "0.5", "--beta-star", "0.05",
                   "--noise-sigma", "0.01", "--depth-lo", "0.5", "--depth-hi", "2.0"}) == 0);
  const fs::path out = fresh_dir("compare");
  REQUIRE(run_cli({"--input", (obs / "observations").string(), "--out", out.string(),
                   "--levels", "2", "--no-agg", "compare"}) == 0);
  const auto link = load_json(out / "compare" / "SYN001_FB_linkage.json");
  const double slope = link.at("slope").get<double>();
  const double intercept = link.at("intercept").get<double>();
  CHECK(slope > 0.9);
  CHECK(slope < 1.1);
  CHECK(std::abs(intercept) < 0.02);
  CHECK(fs::exists(out / "compare" / "SYN001_FB_linkage.tsv"));
}

TEST_CASE("report renders significance and asymmetry tables from results") {
  const fs::path calib = fresh_dir("report_calib");
  REQUIRE(run_cli({"--input", flow_file().string(), "--out", calib.string(), "--levels", "2",
                   "--model", "both", "calibrate"}) == 0);
  const fs::path out = fresh_dir("report_out");
  REQUIRE(run_cli({"--input", (calib / "calib").string(), "--out", out.string(), "report"}) ==
          0);
  bool saw_significance = false, saw_asymmetry = false;
  for (const auto& entry : fs::directory_iterator(out / "report")) {
    const std::string name = entry.path().filename().string();
    saw_significance = saw_significance || name.rfind("significance_", 0) == 0;
    saw_asymmetry = saw_asymmetry || name.rfind("asymmetry_", 0) == 0;
  }
  CHECK(saw_significance);
  CHECK(saw_asymmetry);

  const std::string csv = slurp(out / "report" / "significance_power_law_L2.csv");
  CHECK(csv.rfind("instrument,type,coef,estimate,pvalue,sign,significant", 0) == 0);
}

TEST_CASE("scenario export replays to the frozen outcome") {
  const fs::path out = fresh_dir("scenario");
  REQUIRE(run_cli({"--out", out.string(), "synth", "--kind", "scenario", "--scenario",
                   "fig1_ps"}) == 0);
  const fs::path replayed = fresh_dir("scenario_replay");
  REQUIRE(run_cli({"--input", (out / "scenario_fig1_ps.csv").string(), "--out",
                   replayed.string(), "replay"}) == 0);
  const std::string trades = slurp(replayed / "trades" / "SYN001_trades.csv");
  CHECK(trades.find("PS,6,1,3") != std::string::npos);  // type, omega, remainder, levels
  const auto expected = load_json(out / "scenario_fig1_ps.json");
  CHECK(expected.at("expected").at("r_num").get<int>() == -9);
  CHECK(expected.at("expected").at("r_den").get<int>() == 2000);
}

TEST_CASE("config file supplies defaults that flags override") {
  const fs::path dir = fresh_dir("config");
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "levels=2\nseed=12\n";
  const fs::path out = dir / "out";
  REQUIRE(run_cli({"--config", cfg.string(), "--input", flow_file().string(), "--out",
                   out.string(), "extract"}) == 0);
  CHECK(load_json(out / "features" / "SYN001_stats.json").at("levels").get<int>() == 2);

  const fs::path out2 = dir / "out2";
  REQUIRE(run_cli({"--config", cfg.string(), "--input", flow_file().string(), "--out",
                   out2.string(), "--levels", "3", "extract"}) == 0);
  CHECK(load_json(out2 / "features" / "SYN001_stats.json").at("levels").get<int>() == 3);
}

TEST_CASE("failures exit nonzero") {
  CHECK(run_cli({"--input", "/nonexistent/file.csv", "--out",
                 fresh_dir("fail").string(), "replay"}) != 0);
  CHECK(run_cli({"bogus-subcommand"}) != 0);
  CHECK(run_cli({}) != 0);
}
