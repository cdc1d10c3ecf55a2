#pragma once

#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>

#include "impactlab/features.hpp"
#include "impactlab/order_flow.hpp"
#include "impactlab/regression.hpp"
#include "impactlab/trades.hpp"

// Artifact writers. Output is deterministic for identical inputs: doubles are
// serialized with round-trip precision and JSON keys are ordered; run
// timestamps live in a separate metadata file, never in artifacts.
namespace impactlab {

std::uint64_t fnv1a64(std::string_view data);
std::string hash_hex(std::uint64_t h);

// Table-style per-stock statistics CSV:
// code,r_PB,r_PS,r_FB,r_FS,N,F
void write_stats_csv(const std::string& path, std::span<const StockStats> stats);

nlohmann::json stats_to_json(const StockStats& stats, const ReplayCounters* replay,
                             const FeatureCounters* features);

nlohmann::json calibration_to_json(const CalibrationResult& result,
                                   const std::string& config_hash);
CalibrationResult calibration_from_json(const nlohmann::json& j);

nlohmann::json linkage_to_json(const TaylorLinkage& link, const CalibrationResult& power_law,
                               const CalibrationResult& logarithmic,
                               const std::string& config_hash);

// Replay output: one row per trade with pre/post best quotes.
void write_trades_csv(const std::string& path, std::span<const TradeRecord> trades,
                      const InstrumentConfig& cfg);

// Long-format sign/significance table: instrument,type,coef,estimate,pvalue,
// sign,significant.
void write_significance_csv(const std::string& path, std::span<const SignificanceCell> cells);

// Plot-data matrix, one row per instrument x type, one column per
// coefficient; cells are +2/+1/-1/-2 for significant/insignificant positive/
// negative estimates.
void write_significance_matrix_tsv(const std::string& path,
                                   std::span<const SignificanceCell> cells);

// code, then |a|,|b|,|c1|,|d1|,|e1|,|f1| per trade type.
void write_asymmetry_csv(const std::string& path, std::span<const AsymmetryRow> rows);

// alpha/beta/r2_adj triples of a calibration's grid scan.
void write_grid_trace_tsv(const std::string& path, const CalibrationResult& result);

// x,y scatter of the two models' depth coefficients.
void write_linkage_tsv(const std::string& path, const TaylorLinkage& link);

}  // namespace impactlab
