#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "impactlab/mechanics.hpp"
#include "impactlab/order_flow.hpp"
#include "impactlab/regression.hpp"
#include "impactlab/types.hpp"

namespace impactlab {

// Deterministic generator with hand-rolled samplers: std:: distributions are
// implementation-defined, and golden streams must reproduce bit-for-bit on
// any platform. Core is xoshiro256++ seeded via splitmix64; normal deviates
// come from the cosine branch of Box-Muller (one fresh uniform pair per call,
// no cached spare).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();  // [0, 1), 53-bit resolution
  double uniform(double lo, double hi);
  std::uint64_t bounded(std::uint64_t n);                      // [0, n)
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);  // inclusive
  bool bernoulli(double p) { return uniform() < p; }
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }
  double lognormal(double mu, double sigma);
  int geometric(double p);  // failures before the first success, p in (0,1]

 private:
  std::array<std::uint64_t, 4> state_;
};

// ---------------------------------------------------------------------------
// Scripted scenarios: small hand-verified book states with frozen outcomes.
// ---------------------------------------------------------------------------

struct BookOrder {
  Side side;
  Tick price;
  Units size;
};

struct ScriptedScenario {
  std::string name;
  std::vector<BookOrder> book;
  Side incoming_side;
  Tick limit_price;
  Units size;
  std::size_t depth;  // snapshot depth that resolves the execution
  MechanicalOutcome expected;
};

const std::vector<std::string>& scenario_names();
ScriptedScenario scripted_scenario(std::string_view name);  // throws on unknown name

// ---------------------------------------------------------------------------
// Zero-intelligence order flow
// ---------------------------------------------------------------------------

// Stochastic submit/cancel flow with no strategic behaviour, used to exercise
// the replay pipeline. A replenishment rule keeps both sides populated at
// several levels so deep feature extraction rarely skips.
struct FlowConfig {
  std::uint64_t seed = 1;
  std::string instrument = "SYN001";
  int events = 20000;
  Timestamp start{2003, 6, 2, hms_to_sec(9, 30, 0)};
  Tick initial_mid = 1000;

  double p_cancel = 0.25;
  double p_market = 0.22;  // remainder are passive limits
  double size_ln_mu = 2.2;
  double size_ln_sigma = 0.9;
  double placement_geometric_p = 0.45;  // passive offset from the opposite best
  double deep_sweep_p = 0.35;           // marketable orders priced past level 1
  double partial_p = 0.45;              // marketable orders sized beyond their reach
  // Geometric inter-arrival seconds; 0 picks a rate that spreads the stream
  // over one full trading day, so every intraday bucket sees events.
  double time_advance_p = 0.0;
  int replenish_levels = 6;
  InstrumentConfig instrument_cfg{};
};

std::vector<OrderEvent> zero_intelligence_flow(const FlowConfig& config);

// ---------------------------------------------------------------------------
// Model-generated observations with known ground truth
// ---------------------------------------------------------------------------

struct TruthParams {
  ModelKind kind = ModelKind::power_law;
  int levels = 2;
  double alpha = 0.55;
  double beta = 0.10;  // ignored by the logarithmic model
  double a0 = 0.5;
  double a = 1.2;
  double b = 20.0;
  std::vector<double> c{-1.5, -0.4};  // ask depths
  std::vector<double> d{0.9, 0.3};    // bid depths
  std::vector<double> e{1.2, 0.6};    // ask gaps
  std::vector<double> f{-0.8, -0.5};  // bid gaps
  std::array<double, kIntradayBuckets> g{};  // intraday shifts; g[0] is the baseline
  double noise_sigma = 0.05;

  static TruthParams for_levels(int levels, ModelKind kind = ModelKind::power_law);
};

// Regressor distributions (documented here, sampled in this order per row):
//   omega_norm  lognormal(0, omega_sigma), or omega_raw ~ U[1..omega_lattice]
//               rescaled when a size lattice is requested
//   spread      uniform over spread_range
//   depths      lognormal(0, depth_sigma) or uniform over depth_uniform, ask
//               levels before bid levels
//   gaps        lognormal(0, gap_sigma), ask before bid
//   bucket      uniform over the 24 intraday bins
//   noise       normal(0, truth.noise_sigma)
struct ObsConfig {
  std::uint64_t seed = 1;
  int n = 10000;
  TruthParams truth;
  double omega_sigma = 0.75;
  double omega_scale = 500.0;  // omega_raw = round(omega_norm * scale)
  int omega_lattice = 0;       // > 0: draw sizes from a small integer lattice
  double depth_sigma = 0.75;
  std::optional<std::pair<double, double>> depth_uniform;
  double gap_sigma = 0.5;
  std::pair<double, double> spread_range{5e-4, 3e-3};
};

struct GeneratedObservations {
  std::vector<ImpactObservation> rows;
  TruthParams truth;
};

GeneratedObservations model_observations(const ObsConfig& config);

// True coefficient vector in design-column order for the given spec.
std::vector<double> truth_coefficients(const TruthParams& truth, bool include_dummies);

}  // namespace impactlab
