#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "impactlab/features.hpp"
#include "impactlab/types.hpp"

namespace impactlab {

enum class ModelKind : std::uint8_t { power_law, logarithmic };

const char* to_string(ModelKind k);
std::optional<ModelKind> model_kind_from_string(std::string_view s);

// Model specification: which functional form, how many book levels enter,
// and the exponent grid scanned during calibration.
struct ModelSpec {
  ModelKind kind = ModelKind::power_law;
  int levels = 5;
  std::vector<double> alpha_grid = default_grid();
  std::vector<double> beta_grid = default_grid();  // unused by the logarithmic model
  bool include_dummies = true;
  bool weighted = false;  // group-count weights on aggregated rows

  static std::vector<double> default_grid() { return grid_from_step(0.05); }
  static std::vector<double> grid_from_step(double step);

  int n_params() const {
    return 3 + 4 * levels + (include_dummies ? kIntradayBuckets - 1 : 0);
  }
  std::size_t n_grid_points() const {
    return kind == ModelKind::power_law ? alpha_grid.size() * beta_grid.size()
                                        : alpha_grid.size();
  }
};

// Canonical column order: 1, omega^alpha, S, VA x L, VB x L, GA x L, GB x L,
// then the 23 intraday dummies (bucket 0 is the baseline). Buckets that never
// occur in the data would contribute identically-zero columns, so the design
// carries dummies only for observed buckets and records which ones.
std::vector<std::string> design_column_names(const ModelSpec& spec);
std::vector<std::string> design_column_names(const ModelSpec& spec,
                                             const std::vector<int>& active_buckets);

// Buckets 1..23 with any mass in the observation set (empty when the spec
// disables dummies).
std::vector<int> active_buckets(std::span<const ImpactObservation> obs, const ModelSpec& spec);

// Groups observations of one instrument x type by exact raw trade size and
// replaces every variable by its within-group mean. Bucket dummies become
// group frequencies; group counts are retained as weights. Output is ordered
// by size.
std::vector<ImpactObservation> aggregate_by_size(std::span<const ImpactObservation> obs);

struct DesignInfo {
  std::vector<std::string> names;
  std::vector<int> active_buckets;
};

DesignInfo build_design(std::span<const ImpactObservation> obs, const ModelSpec& spec,
                        double alpha, double beta, Eigen::MatrixXd& X, Eigen::VectorXd& y);

Eigen::VectorXd observation_weights(std::span<const ImpactObservation> obs);

struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd se;
  Eigen::VectorXd tstat;
  Eigen::VectorXd pvalue;
  Eigen::VectorXd residuals;  // y - X coef, unweighted
  double rss = 0.0;
  double r2 = 0.0;
  double r2_adj = 0.0;
  double f_stat = 0.0;
  double f_pvalue = 1.0;
  Eigen::Index n_obs = 0;
  Eigen::Index n_params = 0;
};

// Least squares through a column-pivoted Householder QR on the column-scaled
// design. Homoskedastic covariance sigma^2 (X'X)^-1; t p-values against
// Student-t with n-k dof; overall F test of all slopes zero. Throws
// RankDeficiencyError (naming the dependent columns) when the scaled design's
// reciprocal condition falls below 1e-12, and CalibrationError when rows do
// not exceed columns.
OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               std::span<const std::string> names = {},
               const Eigen::VectorXd* weights = nullptr);

inline constexpr double kRankRcondThreshold = 1e-12;

struct GridPoint {
  double alpha = 0.0;
  double beta = std::numeric_limits<double>::quiet_NaN();
  double r2_adj = -std::numeric_limits<double>::infinity();
  bool ok = false;
};

struct CalibrationResult {
  std::string instrument;
  TradeType type = TradeType::FS;
  ModelKind kind = ModelKind::power_law;
  int levels = 0;
  bool include_dummies = true;
  bool weighted = false;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> column_names;
  std::vector<int> active_buckets;  // dummies actually present in the design
  OlsFit fit;
  std::vector<GridPoint> trace;

  double coefficient(std::string_view name) const;  // throws if unknown
};

enum class GridExecution : std::uint8_t { serial, parallel };

// Scans the exponent grid, fits OLS at every point, and keeps the point
// maximizing adjusted R^2; ties resolve to the smallest alpha, then the
// smallest beta. Rank-deficient points are recorded in the trace and skipped;
// if every point fails the calibration fails. The parallel path distributes
// grid points across OpenMP threads and reduces in canonical order, so its
// result is identical to the serial one.
CalibrationResult grid_calibrate(std::span<const ImpactObservation> obs, const ModelSpec& spec,
                                 GridExecution exec = GridExecution::parallel);

// Naive per-point loop (rebuilds the design from scratch every time); the
// reference the optimized scan is tested and benchmarked against.
CalibrationResult grid_calibrate_reference(std::span<const ImpactObservation> obs,
                                           const ModelSpec& spec);

// ---------------------------------------------------------------------------
// Cross-result reporting
// ---------------------------------------------------------------------------

struct SignificanceCell {
  std::string instrument;
  TradeType type = TradeType::FS;
  std::string coefficient;
  double estimate = 0.0;
  double pvalue = 1.0;
  bool significant = false;
};

// Sign/significance pattern across per-stock results at the given level.
std::vector<SignificanceCell> significance_pattern(std::span<const CalibrationResult> results,
                                                   double level = 0.05);

inline constexpr std::array<const char*, 6> kAsymmetryCoefficients = {"a",  "b",  "c1",
                                                                      "d1", "e1", "f1"};

struct AsymmetryRow {
  std::string instrument;
  // |a|, |b|, |c1|, |d1|, |e1|, |f1| per trade type; NaN where a type result
  // is absent.
  std::array<std::array<double, 6>, kTradeTypes> magnitude{};
  std::array<bool, kTradeTypes> present{};
};

std::vector<AsymmetryRow> asymmetry_compare(std::span<const CalibrationResult> results);

// Regresses the logarithmic model's depth coefficients on beta-scaled
// power-law ones: y = {c_i^ln, d_i^ln}, x = {beta c_i^pl, beta d_i^pl}. With
// beta near zero the two models agree to first order and the fit approaches
// y = x.
struct TaylorLinkage {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<std::array<double, 2>> points;  // (x, y)
};

TaylorLinkage taylor_linkage(const CalibrationResult& power_law,
                             const CalibrationResult& logarithmic);

}  // namespace impactlab
