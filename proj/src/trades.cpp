#include "impactlab/trades.hpp"

namespace impactlab {

TradeType classify(Side side, Units remainder) {
  if (side == Side::buy) return remainder > 0 ? TradeType::PB : TradeType::FB;
  return remainder > 0 ? TradeType::PS : TradeType::FS;
}

Ratio immediate_return(const BookSnapshot& pre, const BookSnapshot& post) {
  return Ratio::of(post.quote_sum() - pre.quote_sum(), pre.quote_sum());
}

StockStats compute_stock_stats(const std::string& instrument,
                               std::span<const TradeRecord> trades) {
  StockStats stats;
  stats.instrument = instrument;
  stats.n_trades = trades.size();

  std::array<NeumaierSum, kTradeTypes> r_sum;
  std::array<std::int64_t, kTradeTypes> omega_sum{};
  std::array<std::size_t, kTradeTypes> count{};
  std::array<std::size_t, kTradeTypes> zero_count{};
  for (const TradeRecord& t : trades) {
    const int k = static_cast<int>(t.type);
    ++count[k];
    r_sum[k].add(t.r);
    omega_sum[k] += t.omega;
    if (t.impact.is_zero()) ++zero_count[k];
  }

  for (int k = 0; k < kTradeTypes; ++k) {
    TypeStats& ts = stats.per_type[k];
    ts.count = count[k];
    if (count[k] == 0) continue;
    const double n = static_cast<double>(count[k]);
    ts.mean_r = r_sum[k].total() / n;
    ts.mean_omega = static_cast<double>(omega_sum[k]) / n;
    ts.zero_return_fraction = static_cast<double>(zero_count[k]) / n;
  }

  if (!trades.empty()) {
    const std::size_t partial = count[static_cast<int>(TradeType::PB)] +
                                count[static_cast<int>(TradeType::PS)];
    stats.partial_fraction = static_cast<double>(partial) / static_cast<double>(trades.size());
  }
  const TypeStats& pb = stats.of(TradeType::PB);
  const TypeStats& ps = stats.of(TradeType::PS);
  if (pb.present() && ps.present()) stats.symmetry_partial = pb.mean_r + ps.mean_r;
  const TypeStats& fb = stats.of(TradeType::FB);
  const TypeStats& fs = stats.of(TradeType::FS);
  if (fb.present() && fs.present()) stats.symmetry_filled = fb.mean_r + fs.mean_r;
  return stats;
}

}  // namespace impactlab
