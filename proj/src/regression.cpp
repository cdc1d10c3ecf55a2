#include "impactlab/regression.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace impactlab {

const char* to_string(ModelKind k) {
  return k == ModelKind::power_law ? "power_law" : "logarithmic";
}

std::optional<ModelKind> model_kind_from_string(std::string_view s) {
  if (s == "power_law" || s == "pl") return ModelKind::power_law;
  if (s == "logarithmic" || s == "ln") return ModelKind::logarithmic;
  return std::nullopt;
}

std::vector<double> ModelSpec::grid_from_step(double step) {
  if (step <= 0.0 || step >= 1.0) throw CalibrationError("grid step must be in (0,1)");
  std::vector<double> grid;
  for (int i = 1; static_cast<double>(i) * step < 1.0 - 1e-12; ++i) {
    // Snap to nine decimals so grid points equal their decimal literals
    // exactly (i * 0.05 alone can land one ulp off 0.15).
    grid.push_back(std::round(static_cast<double>(i) * step * 1e9) / 1e9);
  }
  return grid;
}

std::vector<std::string> design_column_names(const ModelSpec& spec,
                                             const std::vector<int>& buckets) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(spec.n_params()));
  names.emplace_back("a0");
  names.emplace_back("a");
  names.emplace_back("b");
  auto block = [&](const char* prefix) {
    for (int i = 1; i <= spec.levels; ++i) names.push_back(prefix + std::to_string(i));
  };
  block("c");  // V^A
  block("d");  // V^B
  block("e");  // G^A
  block("f");  // G^B
  for (const int b : buckets) names.push_back("g" + std::to_string(b));
  return names;
}

std::vector<std::string> design_column_names(const ModelSpec& spec) {
  std::vector<int> all;
  if (spec.include_dummies)
    for (int b = 1; b < kIntradayBuckets; ++b) all.push_back(b);
  return design_column_names(spec, all);
}

std::vector<int> active_buckets(std::span<const ImpactObservation> obs, const ModelSpec& spec) {
  std::vector<int> active;
  if (!spec.include_dummies) return active;
  std::array<double, kIntradayBuckets> mass{};
  for (const ImpactObservation& o : obs)
    for (int b = 1; b < kIntradayBuckets; ++b) mass[b] += o.bucket_share[b];
  for (int b = 1; b < kIntradayBuckets; ++b)
    if (mass[b] > 0.0) active.push_back(b);
  return active;
}

std::vector<ImpactObservation> aggregate_by_size(std::span<const ImpactObservation> obs) {
  std::map<std::int64_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < obs.size(); ++i) groups[obs[i].omega_raw].push_back(i);

  std::vector<ImpactObservation> out;
  out.reserve(groups.size());
  for (const auto& [omega, members] : groups) {
    const ImpactObservation& first = obs[members.front()];
    const std::size_t levels = first.ask_depth.size();
    ImpactObservation g;
    g.omega_raw = omega;
    g.ask_depth.assign(levels, 0.0);
    g.bid_depth.assign(levels, 0.0);
    g.ask_gap.assign(levels, 0.0);
    g.bid_gap.assign(levels, 0.0);
    for (std::size_t idx : members) {
      const ImpactObservation& o = obs[idx];
      g.r_norm += o.r_norm;
      g.omega_norm += o.omega_norm;
      g.spread += o.spread;
      for (std::size_t l = 0; l < levels; ++l) {
        g.ask_depth[l] += o.ask_depth[l];
        g.bid_depth[l] += o.bid_depth[l];
        g.ask_gap[l] += o.ask_gap[l];
        g.bid_gap[l] += o.bid_gap[l];
      }
      for (int b = 0; b < kIntradayBuckets; ++b) g.bucket_share[b] += o.bucket_share[b];
    }
    const double n = static_cast<double>(members.size());
    g.r_norm /= n;
    g.omega_norm /= n;
    g.spread /= n;
    for (std::size_t l = 0; l < levels; ++l) {
      g.ask_depth[l] /= n;
      g.bid_depth[l] /= n;
      g.ask_gap[l] /= n;
      g.bid_gap[l] /= n;
    }
    for (int b = 0; b < kIntradayBuckets; ++b) g.bucket_share[b] /= n;
    g.bucket = members.size() == 1 ? first.bucket : -1;
    g.weight = n;
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

void check_levels(std::span<const ImpactObservation> obs, int levels) {
  for (const ImpactObservation& o : obs)
    if (static_cast<int>(o.ask_depth.size()) < levels)
      throw CalibrationError("observation has fewer than L=" + std::to_string(levels) +
                             " levels");
}

double depth_column_value(double v, const ModelSpec& spec, double beta) {
  if (spec.kind == ModelKind::power_law) return std::pow(v, beta);
  if (v <= 0.0) throw CalibrationError("non-positive depth under logarithm");
  return std::log(v);
}

}  // namespace

DesignInfo build_design(std::span<const ImpactObservation> obs, const ModelSpec& spec,
                        double alpha, double beta, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
  const auto n = static_cast<Eigen::Index>(obs.size());
  const int L = spec.levels;
  check_levels(obs, L);
  DesignInfo info;
  info.active_buckets = active_buckets(obs, spec);
  info.names = design_column_names(spec, info.active_buckets);
  X.resize(n, 3 + 4 * L + static_cast<Eigen::Index>(info.active_buckets.size()));
  y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const ImpactObservation& o = obs[static_cast<std::size_t>(i)];
    y(i) = o.r_norm;
    Eigen::Index c = 0;
    X(i, c++) = 1.0;
    X(i, c++) = std::pow(o.omega_norm, alpha);
    X(i, c++) = o.spread;
    for (int l = 0; l < L; ++l) X(i, c++) = depth_column_value(o.ask_depth[l], spec, beta);
    for (int l = 0; l < L; ++l) X(i, c++) = depth_column_value(o.bid_depth[l], spec, beta);
    for (int l = 0; l < L; ++l) X(i, c++) = o.ask_gap[l];
    for (int l = 0; l < L; ++l) X(i, c++) = o.bid_gap[l];
    for (const int b : info.active_buckets) X(i, c++) = o.bucket_share[b];
  }
  return info;
}

Eigen::VectorXd observation_weights(std::span<const ImpactObservation> obs) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) w(static_cast<Eigen::Index>(i)) = obs[i].weight;
  return w;
}

OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               std::span<const std::string> names, const Eigen::VectorXd* weights) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (n <= k)
    throw CalibrationError("need more observations than parameters (n=" + std::to_string(n) +
                           ", k=" + std::to_string(k) + ")");

  auto column_name = [&](Eigen::Index j) {
    return j < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(j)]
                                                       : "x" + std::to_string(j);
  };

  Eigen::MatrixXd Xw;
  Eigen::VectorXd yw;
  const Eigen::MatrixXd* Xp = &X;
  const Eigen::VectorXd* yp = &y;
  if (weights != nullptr) {
    const Eigen::VectorXd sw = weights->array().sqrt();
    Xw = sw.asDiagonal() * X;
    yw = sw.asDiagonal() * y;
    Xp = &Xw;
    yp = &yw;
  }

  // Scale columns to unit norm so the rank test sees a dimensionless matrix.
  Eigen::VectorXd scale(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double s = Xp->col(j).norm();
    if (s == 0.0)
      throw RankDeficiencyError(
          "design rank deficient within machine precision: column " +
              std::string(column_name(j)) + " is identically zero",
          {std::string(column_name(j))});
    scale(j) = s;
  }
  const Eigen::MatrixXd Xs = (*Xp) * scale.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
  const Eigen::VectorXd rdiag = qr.matrixQR().diagonal().head(k).cwiseAbs();
  const double rmax = rdiag.maxCoeff();
  Eigen::Index rank = 0;
  for (Eigen::Index j = 0; j < k; ++j)
    if (rdiag(j) >= kRankRcondThreshold * rmax) ++rank;
  if (rank < k) {
    const auto& perm = qr.colsPermutation().indices();
    std::vector<std::string> dependent;
    for (Eigen::Index j = rank; j < k; ++j)
      dependent.push_back(std::string(column_name(perm(j))));
    std::sort(dependent.begin(), dependent.end());
    std::string what = "design rank deficient within machine precision; dependent columns:";
    for (const auto& d : dependent) what += " " + d;
    throw RankDeficiencyError(what, std::move(dependent));
  }

  OlsFit fit;
  fit.n_obs = n;
  fit.n_params = k;
  const Eigen::VectorXd ys = qr.solve(*yp);
  fit.coef = ys.cwiseQuotient(scale);
  fit.residuals = y - X * fit.coef;

  Eigen::VectorXd wresid = *yp - (*Xp) * fit.coef;
  fit.rss = wresid.squaredNorm();
  const double dof = static_cast<double>(n - k);
  const double sigma2 = fit.rss / dof;

  // (X'X)^-1 from the pivoted factorization: P (R'R)^-1 P', then unscaled.
  const Eigen::MatrixXd R =
      qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd inv_scaled = Rinv * Rinv.transpose();
  const Eigen::MatrixXd inv_perm =
      qr.colsPermutation() * inv_scaled * qr.colsPermutation().transpose();

  fit.se.resize(k);
  fit.tstat.resize(k);
  fit.pvalue.resize(k);
  const boost::math::students_t tdist(dof);
  for (Eigen::Index j = 0; j < k; ++j) {
    fit.se(j) = std::sqrt(sigma2 * inv_perm(j, j)) / scale(j);
    fit.tstat(j) = fit.coef(j) / fit.se(j);
    if (std::isfinite(fit.tstat(j))) {
      fit.pvalue(j) =
          2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(fit.tstat(j))));
    } else {
      // Exact-fit degeneracy: zero residual variance pins the estimate.
      fit.pvalue(j) = std::isnan(fit.tstat(j)) ? 1.0 : 0.0;
    }
  }

  // Weighted total sum of squares around the weighted mean.
  double tss;
  if (weights != nullptr) {
    const double wsum = weights->sum();
    const double ybar = weights->dot(y) / wsum;
    tss = (weights->array() * (y.array() - ybar).square()).sum();
  } else {
    const double ybar = y.mean();
    tss = (y.array() - ybar).square().sum();
  }

  if (tss > 0.0) {
    fit.r2 = 1.0 - fit.rss / tss;
  } else {
    fit.r2 = fit.rss == 0.0 ? 1.0 : 0.0;
  }
  fit.r2_adj = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / dof;

  if (k > 1) {
    const double denom = std::max(1.0 - fit.r2, 1e-300);
    fit.f_stat = (fit.r2 / static_cast<double>(k - 1)) / (denom / dof);
    const boost::math::fisher_f fdist(static_cast<double>(k - 1), dof);
    fit.f_pvalue = boost::math::cdf(boost::math::complement(fdist, fit.f_stat));
  } else {
    fit.f_stat = std::numeric_limits<double>::quiet_NaN();
    fit.f_pvalue = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Grid scan
// ---------------------------------------------------------------------------

namespace {

struct GridAxes {
  std::vector<double> alpha;
  std::vector<double> beta;  // single NaN entry for the logarithmic model

  std::size_t points() const { return alpha.size() * beta.size(); }
  double alpha_of(std::size_t p) const { return alpha[p / beta.size()]; }
  double beta_of(std::size_t p) const { return beta[p % beta.size()]; }
};

GridAxes make_axes(const ModelSpec& spec) {
  GridAxes axes;
  axes.alpha = spec.alpha_grid;
  if (spec.kind == ModelKind::power_law)
    axes.beta = spec.beta_grid;
  else
    axes.beta = {std::numeric_limits<double>::quiet_NaN()};
  if (axes.alpha.empty() || axes.beta.empty()) throw CalibrationError("empty exponent grid");
  for (const double a : axes.alpha)
    if (a <= 0.0 || a >= 1.0) throw CalibrationError("grid exponents must lie in (0,1)");
  if (spec.kind == ModelKind::power_law)
    for (const double b : axes.beta)
      if (b <= 0.0 || b >= 1.0) throw CalibrationError("grid exponents must lie in (0,1)");
  return axes;
}

// Precomputed design blocks: everything except the omega^alpha column and the
// depth block is grid-invariant, and those two only depend on one axis each.
struct ScanCache {
  std::vector<int> buckets;  // observed dummy buckets
  Eigen::VectorXd y;
  Eigen::VectorXd spread;
  Eigen::MatrixXd gaps;     // n x 2L
  Eigen::MatrixXd dummies;  // n x |buckets|
  std::vector<Eigen::VectorXd> omega_pow;   // per alpha
  std::vector<Eigen::MatrixXd> depth_pow;   // per beta (or one log block), n x 2L
};

ScanCache build_cache(std::span<const ImpactObservation> obs, const ModelSpec& spec,
                      const GridAxes& axes) {
  const auto n = static_cast<Eigen::Index>(obs.size());
  const int L = spec.levels;
  check_levels(obs, L);

  ScanCache cache;
  cache.buckets = active_buckets(obs, spec);
  cache.y.resize(n);
  cache.spread.resize(n);
  cache.gaps.resize(n, 2 * L);
  cache.dummies.resize(n, static_cast<Eigen::Index>(cache.buckets.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const ImpactObservation& o = obs[static_cast<std::size_t>(i)];
    cache.y(i) = o.r_norm;
    cache.spread(i) = o.spread;
    for (int l = 0; l < L; ++l) {
      cache.gaps(i, l) = o.ask_gap[l];
      cache.gaps(i, L + l) = o.bid_gap[l];
    }
    for (std::size_t b = 0; b < cache.buckets.size(); ++b)
      cache.dummies(i, static_cast<Eigen::Index>(b)) = o.bucket_share[cache.buckets[b]];
  }

  cache.omega_pow.reserve(axes.alpha.size());
  for (double alpha : axes.alpha) {
    Eigen::VectorXd col(n);
    for (Eigen::Index i = 0; i < n; ++i)
      col(i) = std::pow(obs[static_cast<std::size_t>(i)].omega_norm, alpha);
    cache.omega_pow.push_back(std::move(col));
  }

  cache.depth_pow.reserve(axes.beta.size());
  for (double beta : axes.beta) {
    Eigen::MatrixXd block(n, 2 * L);
    for (Eigen::Index i = 0; i < n; ++i) {
      const ImpactObservation& o = obs[static_cast<std::size_t>(i)];
      for (int l = 0; l < L; ++l) {
        block(i, l) = depth_column_value(o.ask_depth[l], spec, beta);
        block(i, L + l) = depth_column_value(o.bid_depth[l], spec, beta);
      }
    }
    cache.depth_pow.push_back(std::move(block));
  }
  return cache;
}

void assemble(const ScanCache& cache, const ModelSpec& spec, std::size_t alpha_idx,
              std::size_t beta_idx, Eigen::MatrixXd& X) {
  const Eigen::Index n = cache.y.size();
  const int L = spec.levels;
  const auto n_dummies = static_cast<Eigen::Index>(cache.buckets.size());
  X.resize(n, 3 + 4 * L + n_dummies);
  X.col(0).setOnes();
  X.col(1) = cache.omega_pow[alpha_idx];
  X.col(2) = cache.spread;
  X.middleCols(3, 2 * L) = cache.depth_pow[beta_idx];
  X.middleCols(3 + 2 * L, 2 * L) = cache.gaps;
  if (n_dummies > 0) X.rightCols(n_dummies) = cache.dummies;
}

// Canonical-order reduction: the first strictly-better point wins, which
// realizes the smallest-alpha-then-smallest-beta tie break.
std::size_t select_best(const std::vector<GridPoint>& trace) {
  std::size_t best = trace.size();
  for (std::size_t p = 0; p < trace.size(); ++p) {
    if (!trace[p].ok) continue;
    if (best == trace.size() || trace[p].r2_adj > trace[best].r2_adj) best = p;
  }
  if (best == trace.size())
    throw CalibrationError("calibration failed: every grid point was rank deficient");
  return best;
}

CalibrationResult finalize(std::span<const ImpactObservation> obs, const ModelSpec& spec,
                           const GridAxes& axes, std::vector<GridPoint> trace) {
  const std::size_t best = select_best(trace);
  CalibrationResult result;
  result.kind = spec.kind;
  result.levels = spec.levels;
  result.include_dummies = spec.include_dummies;
  result.weighted = spec.weighted;
  result.alpha = axes.alpha_of(best);
  result.beta = axes.beta_of(best);
  result.trace = std::move(trace);

  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  const DesignInfo info = build_design(obs, spec, result.alpha, result.beta, X, y);
  result.column_names = info.names;
  result.active_buckets = info.active_buckets;
  Eigen::VectorXd w;
  const Eigen::VectorXd* wp = nullptr;
  if (spec.weighted) {
    w = observation_weights(obs);
    wp = &w;
  }
  result.fit = ols_fit(X, y, result.column_names, wp);
  return result;
}

}  // namespace

CalibrationResult grid_calibrate(std::span<const ImpactObservation> obs, const ModelSpec& spec,
                                 GridExecution exec) {
  const GridAxes axes = make_axes(spec);
  const ScanCache cache = build_cache(obs, spec, axes);
  const std::vector<std::string> names = design_column_names(spec, cache.buckets);
  if (obs.size() <= names.size())
    throw CalibrationError("not enough observations for the design (n=" +
                           std::to_string(obs.size()) + ", k=" + std::to_string(names.size()) +
                           ")");
  Eigen::VectorXd weights;
  const Eigen::VectorXd* wp = nullptr;
  if (spec.weighted) {
    weights = observation_weights(obs);
    wp = &weights;
  }

  const auto n_points = static_cast<std::ptrdiff_t>(axes.points());
  std::vector<GridPoint> trace(static_cast<std::size_t>(n_points));

  const int n_threads = exec == GridExecution::parallel ? effective_threads() : 1;
#ifdef _OPENMP
#pragma omp parallel num_threads(n_threads)
#endif
  {
    Eigen::MatrixXd X;
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (std::ptrdiff_t p = 0; p < n_points; ++p) {
      const auto idx = static_cast<std::size_t>(p);
      GridPoint& point = trace[idx];
      point.alpha = axes.alpha_of(idx);
      point.beta = axes.beta_of(idx);
      assemble(cache, spec, idx / axes.beta.size(), idx % axes.beta.size(), X);
      try {
        const OlsFit fit = ols_fit(X, cache.y, names, wp);
        point.r2_adj = fit.r2_adj;
        point.ok = true;
      } catch (const RankDeficiencyError&) {
        point.ok = false;
      }
    }
  }
  (void)n_threads;
  return finalize(obs, spec, axes, std::move(trace));
}

CalibrationResult grid_calibrate_reference(std::span<const ImpactObservation> obs,
                                           const ModelSpec& spec) {
  const GridAxes axes = make_axes(spec);
  Eigen::VectorXd weights;
  const Eigen::VectorXd* wp = nullptr;
  if (spec.weighted) {
    weights = observation_weights(obs);
    wp = &weights;
  }

  std::vector<GridPoint> trace(axes.points());
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  for (std::size_t p = 0; p < trace.size(); ++p) {
    GridPoint& point = trace[p];
    point.alpha = axes.alpha_of(p);
    point.beta = axes.beta_of(p);
    const DesignInfo info = build_design(obs, spec, point.alpha, point.beta, X, y);
    if (obs.size() <= info.names.size())
      throw CalibrationError("not enough observations for the design (n=" +
                             std::to_string(obs.size()) + ", k=" +
                             std::to_string(info.names.size()) + ")");
    try {
      const OlsFit fit = ols_fit(X, y, info.names, wp);
      point.r2_adj = fit.r2_adj;
      point.ok = true;
    } catch (const RankDeficiencyError&) {
      point.ok = false;
    }
  }
  return finalize(obs, spec, axes, std::move(trace));
}

double CalibrationResult::coefficient(std::string_view name) const {
  for (std::size_t j = 0; j < column_names.size(); ++j)
    if (column_names[j] == name) return fit.coef(static_cast<Eigen::Index>(j));
  throw CalibrationError("unknown coefficient: " + std::string(name));
}

std::vector<SignificanceCell> significance_pattern(std::span<const CalibrationResult> results,
                                                   double level) {
  std::vector<SignificanceCell> cells;
  for (const CalibrationResult& r : results) {
    for (std::size_t j = 0; j < r.column_names.size(); ++j) {
      SignificanceCell cell;
      cell.instrument = r.instrument;
      cell.type = r.type;
      cell.coefficient = r.column_names[j];
      cell.estimate = r.fit.coef(static_cast<Eigen::Index>(j));
      cell.pvalue = r.fit.pvalue(static_cast<Eigen::Index>(j));
      cell.significant = cell.pvalue < level;
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<AsymmetryRow> asymmetry_compare(std::span<const CalibrationResult> results) {
  std::map<std::string, AsymmetryRow> rows;
  for (const CalibrationResult& r : results) {
    AsymmetryRow& row = rows[r.instrument];
    row.instrument = r.instrument;
    const int t = static_cast<int>(r.type);
    row.present[t] = true;
    for (std::size_t c = 0; c < kAsymmetryCoefficients.size(); ++c)
      row.magnitude[t][c] = std::abs(r.coefficient(kAsymmetryCoefficients[c]));
  }
  std::vector<AsymmetryRow> out;
  out.reserve(rows.size());
  for (auto& [_, row] : rows) {
    for (int t = 0; t < kTradeTypes; ++t)
      if (!row.present[t])
        row.magnitude[t].fill(std::numeric_limits<double>::quiet_NaN());
    out.push_back(std::move(row));
  }
  return out;
}

TaylorLinkage taylor_linkage(const CalibrationResult& power_law,
                             const CalibrationResult& logarithmic) {
  if (power_law.kind != ModelKind::power_law || logarithmic.kind != ModelKind::logarithmic)
    throw CalibrationError("taylor_linkage expects one power-law and one logarithmic result");
  if (power_law.levels != logarithmic.levels)
    throw CalibrationError("taylor_linkage requires matching level counts");

  TaylorLinkage link;
  const int L = power_law.levels;
  for (int i = 1; i <= L; ++i) {
    for (const char prefix : {'c', 'd'}) {
      const std::string name = std::string(1, prefix) + std::to_string(i);
      const double x = power_law.beta * power_law.coefficient(name);
      const double y = logarithmic.coefficient(name);
      link.points.push_back({x, y});
    }
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(link.points.size());
  for (const auto& [x, y] : link.points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) throw CalibrationError("taylor_linkage: degenerate scatter");
  link.slope = (n * sxy - sx * sy) / det;
  link.intercept = (sy * sxx - sx * sxy) / det;
  return link;
}

}  // namespace impactlab
