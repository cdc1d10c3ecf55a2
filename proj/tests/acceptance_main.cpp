// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs the oracle-based checks end to end on synthetic data.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <vector>

#include "impactlab/cli.hpp"
#include "impactlab/features.hpp"
#include "impactlab/mechanics.hpp"
#include "impactlab/order_flow.hpp"
#include "impactlab/regression.hpp"
#include "impactlab/synth.hpp"
#include "impactlab/trades.hpp"
#include "test_support.hpp"

using namespace impactlab;
using namespace impactlab::testsupport;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int number;
  const char* description;
  std::function<bool(std::string&)> run;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1. Engine replay return equals the closed form exactly, 1e4 cases, < 10 s.
bool mechanical_equivalence(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(20030602);
  int cases = 0, traded = 0;
  while (cases < 10000) {
    RandomBook rb = random_book(rng);
    const auto pre = rb.book.snapshot(12);
    if (!pre) return false;
    const RandomOrder o = random_order(rng, *pre);
    const MechanicalOutcome predicted = o.side == Side::sell
                                            ? predict_sell(*pre, o.price, o.size)
                                            : predict_buy(*pre, o.price, o.size);
    if (predicted.status == PredictStatus::insufficient_depth) return false;
    ++cases;

    const auto report = rb.book.apply_limit_order(o.side, o.price, o.size, 1u << 20);
    if (predicted.status == PredictStatus::no_execution) {
      if (report.traded()) return false;
      continue;
    }
    if (report.executed() != predicted.executed || report.remainder != predicted.remainder ||
        report.levels_touched() != predicted.levels_reached ||
        classify(o.side, report.remainder) != predicted.kind)
      return false;
    const auto post = rb.book.snapshot(12);
    if (predicted.status == PredictStatus::undefined_return) {
      if (post.has_value()) return false;
      continue;
    }
    if (!post.has_value()) return false;
    if (!(immediate_return(*pre, *post) == predicted.impact)) return false;
    ++traded;
  }
  const double elapsed = seconds_since(start);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "10000 cases (%d executions) in %.2f s", traded, elapsed);
  detail = buf;
  return traded > 4000 && elapsed < 10.0;
}

// 2. |r_PS - r_FS| >= relative spread for 1e3 random seller configurations.
bool gap_bound(std::string& detail) {
  Rng rng(14);
  int checked = 0;
  while (checked < 1000) {
    RandomBook rb = random_book(rng);
    const auto snap = rb.book.snapshot(12);
    const Tick pi = snap->best_bid() - static_cast<Tick>(rng.bounded(8));
    if (pi <= 0) continue;
    if (!ratio_abs_geq(ps_fs_gap(*snap, pi), snap->relative_spread())) return false;
    ++checked;
  }
  detail = "1000 configurations, zero violations";
  return true;
}

// 3. Filled trades strictly inside level-1 depth have exactly zero impact.
bool zero_impact_inside_level_one(std::string& detail) {
  Rng rng(15);
  int checked = 0;
  while (checked < 2000) {
    RandomBook rb = random_book(rng);
    const auto pre = rb.book.snapshot(12);
    const bool sell = rng.bernoulli(0.5);
    const Units depth = sell ? pre->bid_volume.front() : pre->ask_volume.front();
    if (depth < 2) continue;
    const Units size = 1 + static_cast<Units>(rng.bounded(static_cast<std::uint64_t>(depth - 1)));
    const Tick limit = sell ? pre->best_bid() - static_cast<Tick>(rng.bounded(3))
                            : pre->best_ask() + static_cast<Tick>(rng.bounded(3));
    if (limit <= 0) continue;

    const MechanicalOutcome predicted =
        sell ? predict_sell(*pre, limit, size) : predict_buy(*pre, limit, size);
    if (predicted.status != PredictStatus::ok || is_partial(predicted.kind)) return false;
    if (!predicted.impact.is_zero()) return false;

    const auto report =
        rb.book.apply_limit_order(sell ? Side::sell : Side::buy, limit, size, 1u << 20);
    if (report.remainder != 0) return false;
    const auto post = rb.book.snapshot(12);
    if (!post || !immediate_return(*pre, *post).is_zero()) return false;
    ++checked;
  }
  detail = "2000 filled trades inside level 1, all r = 0";
  return true;
}

// 4. Grid scan recovers on-grid generative exponents and coefficients.
bool generative_recovery(std::string& detail) {
  ModelSpec spec;
  spec.kind = ModelKind::power_law;
  spec.levels = 2;
  spec.include_dummies = false;

  detail.clear();
  for (const auto& [alpha_star, beta_star] :
       {std::pair{0.25, 0.15}, std::pair{0.55, 0.10}}) {
    int good = 0;
    double worst_scan = 0.0;
    for (int seed = 1; seed <= 100; ++seed) {
      ObsConfig cfg;
      cfg.seed = static_cast<std::uint64_t>(seed) * 1000003ULL;
      cfg.n = 10000;
      cfg.truth = TruthParams::for_levels(2);
      cfg.truth.alpha = alpha_star;
      cfg.truth.beta = beta_star;
      cfg.truth.noise_sigma = 0.05;
      const auto gen = model_observations(cfg);

      const auto start = std::chrono::steady_clock::now();
      const CalibrationResult result = grid_calibrate(gen.rows, spec);
      worst_scan = std::max(worst_scan, seconds_since(start));
      if (worst_scan >= 120.0) return false;

      if (result.alpha != alpha_star || result.beta != beta_star) continue;
      const auto truth = truth_coefficients(cfg.truth, false);
      bool within = true;
      for (Eigen::Index j = 0; j < result.fit.coef.size(); ++j)
        within = within && std::abs(result.fit.coef(j) - truth[static_cast<std::size_t>(j)]) <=
                               3.0 * result.fit.se(j);
      if (within) ++good;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "(%.2f,%.2f): %d/100 seeds, worst scan %.1f s; ",
                  alpha_star, beta_star, good, worst_scan);
    detail += buf;
    if (good < 95) return false;
  }
  return true;
}

// 5. Noise-free generative fit is exact at the chosen point.
bool noise_free_fit(std::string& detail) {
  ObsConfig cfg;
  cfg.seed = 5;
  cfg.n = 5000;
  cfg.truth = TruthParams::for_levels(2);
  cfg.truth.alpha = 0.55;
  cfg.truth.beta = 0.10;
  cfg.truth.noise_sigma = 0.0;
  const auto gen = model_observations(cfg);
  ModelSpec spec;
  spec.levels = 2;
  spec.include_dummies = false;
  const CalibrationResult result = grid_calibrate(gen.rows, spec);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "r2_adj = 1 - %.2e, |residual| = %.2e",
                1.0 - result.fit.r2_adj, result.fit.residuals.norm());
  detail = buf;
  return result.alpha == 0.55 && result.beta == 0.10 && result.fit.r2_adj >= 1.0 - 1e-9 &&
         result.fit.residuals.norm() < 1e-8;
}

// 6. Taylor linkage between the two models at small beta.
bool taylor_linkage_check(std::string& detail) {
  ObsConfig cfg;
  cfg.seed = 6;
  cfg.n = 10000;
  cfg.truth = TruthParams::for_levels(2);
  cfg.truth.alpha = 0.50;
  cfg.truth.beta = 0.05;
  cfg.truth.noise_sigma = 0.01;
  cfg.depth_uniform = {0.5, 2.0};
  const auto gen = model_observations(cfg);
  ModelSpec spec;
  spec.levels = 2;
  spec.include_dummies = false;
  const CalibrationResult pl = grid_calibrate(gen.rows, spec);
  spec.kind = ModelKind::logarithmic;
  const CalibrationResult ln = grid_calibrate(gen.rows, spec);
  const TaylorLinkage link = taylor_linkage(pl, ln);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "slope %.4f, intercept %.5f", link.slope, link.intercept);
  detail = buf;
  return link.slope >= 0.9 && link.slope <= 1.1 && std::abs(link.intercept) <= 0.02;
}

// 7. Nominal 95% confidence intervals cover at 95% +- 3% over 1000 runs.
bool ols_coverage(std::string& detail) {
  const int reps = 1000;
  const int n = 300;
  const int k = 10;
  Rng xrng(70);
  Eigen::MatrixXd X(n, k);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j < k; ++j) X(i, j) = xrng.normal();
  }
  Eigen::VectorXd truth(k);
  for (int j = 0; j < k; ++j) truth(j) = 0.5 * j - 2.0;
  const Eigen::VectorXd signal = X * truth;

  // 97.5% Student-t quantile for n - k dof via bisection on the fitted
  // p-value scale would be circular; the small-dof correction is tiny at 290
  // dof, so use the exact quantile from the t distribution via boost in the
  // library path and a fixed 1.96815 (t_{0.975,290}) here.
  const double q = 1.96815;
  std::size_t covered = 0, total = 0;
  for (int rep = 1; rep <= reps; ++rep) {
    Rng rng(static_cast<std::uint64_t>(rep) * 2654435761ULL);
    Eigen::VectorXd y = signal;
    for (int i = 0; i < n; ++i) y(i) += rng.normal(0.0, 1.5);
    const OlsFit fit = ols_fit(X, y);
    for (int j = 0; j < k; ++j) {
      ++total;
      if (std::abs(fit.coef(j) - truth(j)) <= q * fit.se(j)) ++covered;
    }
  }
  const double rate = static_cast<double>(covered) / static_cast<double>(total);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "coverage %.4f over %zu intervals", rate, total);
  detail = buf;
  return rate >= 0.92 && rate <= 0.98;
}

// 8. Duplicated design column raises the named error, never a silent fit.
bool rank_deficiency(std::string& detail) {
  ObsConfig cfg;
  cfg.seed = 8;
  cfg.n = 200;
  cfg.truth = TruthParams::for_levels(2);
  const auto gen = model_observations(cfg);
  ModelSpec spec;
  spec.levels = 2;
  spec.include_dummies = false;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  build_design(gen.rows, spec, 0.5, 0.5, X, y);
  Eigen::MatrixXd Xdup(X.rows(), X.cols() + 1);
  Xdup << X, X.col(1);
  auto names = design_column_names(spec);
  names.push_back("a_dup");
  try {
    ols_fit(Xdup, y, names);
    return false;
  } catch (const RankDeficiencyError& e) {
    if (e.columns.empty()) return false;
    detail = "raised with columns:";
    for (const auto& c : e.columns) detail += " " + c;
    return true;
  }
}

// 9. Byte-identical reruns through the CLI; parallel == serial scans.
bool determinism(std::string& detail) {
  const fs::path root = fs::temp_directory_path() / "impactlab_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  const fs::path synth_out = root / "synth";
  if (run_cli({"--out", synth_out.string(), "--seed", "9", "synth", "--kind", "flow",
               "--events", "6000"}) != 0)
    return false;
  const std::string flow = (synth_out / "flow_SYN001.csv").string();

  auto calibrate = [&](const std::string& name, const std::string& exec) {
    const fs::path out = root / name;
    return run_cli({"--input", flow, "--out", out.string(), "--levels", "2", "--model", "pl",
                    "--grid-exec", exec, "calibrate"}) == 0;
  };
  if (!calibrate("a", "par") || !calibrate("b", "par") || !calibrate("c", "ser")) return false;

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(root / "a" / "calib")) {
    const std::string name = entry.path().filename().string();
    const std::string a = slurp(entry.path());
    if (a != slurp(root / "b" / "calib" / name)) return false;  // rerun
    if (a != slurp(root / "c" / "calib" / name)) return false;  // parallel vs serial
    ++compared;
  }
  detail = std::to_string(compared) + " artifacts byte-identical across rerun and serial scan";
  return compared >= 1;
}

// 10. Only continuous-session events produce trades.
bool session_filtering(std::string& detail) {
  const fs::path root = fs::temp_directory_path() / "impactlab_acceptance_fixture";
  fs::create_directories(root);
  const fs::path file = root / "phases.csv";
  {
    std::ofstream out(file);
    out << kOrderFlowHeader << '\n'
        << "2003-06-02T09:10:00,1,S,B,9.90,5,pre1,000001\n"     // closed
        << "2003-06-02T09:16:00,2,S,B,9.99,50,auc1,000001\n"    // call auction
        << "2003-06-02T09:20:00,3,S,S,10.01,50,auc2,000001\n"
        << "2003-06-02T09:26:00,4,S,B,9.98,30,cool1,000001\n"   // cooling
        << "2003-06-02T09:31:00,5,S,S,9.99,10,am1,000001\n"     // trades
        << "2003-06-02T10:15:00,6,S,B,10.01,5,am2,000001\n"     // trades
        << "2003-06-02T12:00:00,7,S,S,9.98,40,frz1,000001\n"    // freeze: dropped
        << "2003-06-02T13:05:00,8,S,S,9.98,12,pm1,000001\n"     // trades
        << "2003-06-02T14:59:59,9,S,B,10.01,3,pm2,000001\n"     // trades
        << "2003-06-02T15:10:00,10,S,S,9.90,5,post1,000001\n";  // closed
  }
  OrderFlowReader reader(file.string(), InstrumentConfig{});
  Replayer replayer("000001", 3);
  std::vector<TradeRecord> trades;
  OrderEvent e;
  while (reader.next(e))
    replayer.process(e, [&](TradeRecord&& t) { trades.push_back(std::move(t)); });
  replayer.finish();

  if (trades.empty()) return false;
  bool am = false, pm = false;
  for (const TradeRecord& t : trades) {
    const SessionPhase phase = session_phase(t.timestamp);
    if (!is_continuous(phase)) return false;
    am = am || phase == SessionPhase::continuous_am;
    pm = pm || phase == SessionPhase::continuous_pm;
  }
  if (replayer.counters().dropped_out_of_session != 3) return false;
  if (replayer.counters().auction_queued != 3) return false;
  detail = std::to_string(trades.size()) + " trades, all inside the continuous sessions";
  return am && pm;
}

// 11. Self-normalization identities at 1e-12.
bool normalization_identities(std::string& detail) {
  FlowConfig cfg;
  cfg.seed = 11;
  cfg.events = 20000;
  const auto events = zero_intelligence_flow(cfg);
  Replayer replayer(cfg.instrument, 6);
  const auto trades = replayer.replay(events);
  if (trades.size() < 1000) return false;
  const StockStats stats = compute_stock_stats(cfg.instrument, trades);
  const Normalizer norm(stats);

  std::array<NeumaierSum, kTradeTypes> r_sum, omega_sum;
  std::array<std::size_t, kTradeTypes> count{};
  RawObservation raw;
  for (const TradeRecord& t : trades) {
    if (!extract(t, 5, SpreadMode::relative, InstrumentConfig{}, raw)) return false;
    if (!norm.usable(raw.type)) return false;
    const ImpactObservation obs = norm.normalize(raw);
    const int k = static_cast<int>(raw.type);
    r_sum[k].add(obs.r_norm);
    omega_sum[k].add(obs.omega_norm);
    ++count[k];
  }
  double worst = 0.0;
  for (int k = 0; k < kTradeTypes; ++k) {
    if (count[k] == 0) return false;
    const double n = static_cast<double>(count[k]);
    worst = std::max(worst, std::abs(r_sum[k].total() / n - 1.0));
    worst = std::max(worst, std::abs(omega_sum[k].total() / n - 1.0));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "worst deviation %.2e", worst);
  detail = buf;
  return worst < 1e-12;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "mechanical oracle equivalence, 1e4 randomized cases, exact, < 10 s",
       mechanical_equivalence},
      {2, "|r_PS - r_FS| >= relative spread over 1e3 seller configurations", gap_bound},
      {3, "filled trades inside level-1 depth have zero impact", zero_impact_inside_level_one},
      {4, "grid scan recovers (0.25,0.15) and (0.55,0.10) in >= 95/100 seeds",
       generative_recovery},
      {5, "noise-free generative fit reaches R2-adj >= 1 - 1e-9", noise_free_fit},
      {6, "Taylor linkage slope in [0.9,1.1], intercept in [-0.02,0.02]",
       taylor_linkage_check},
      {7, "95% confidence intervals cover at 95% +- 3% over 1000 runs", ols_coverage},
      {8, "duplicated column raises the named rank-deficiency error", rank_deficiency},
      {9, "pipeline reruns and parallel/serial scans byte-identical", determinism},
      {10, "trades only inside [9:30,11:30) u [13:00,15:00)", session_filtering},
      {11, "mean(omega_norm) = mean(r_norm) = 1 within 1e-12 per type",
       normalization_identities},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %2d. %s%s%s\n", ok ? "PASS" : "FAIL", c.number, c.description,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
