#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>

#include "impactlab/order_book.hpp"
#include "impactlab/types.hpp"

namespace impactlab {

// One incoming order's full execution outcome during continuous trading.
// Snapshots are taken immediately before (t-) and after (t+) the order and
// are always two-sided; the mid-quote return is exact in tick arithmetic.
struct TradeRecord {
  std::string instrument;
  Timestamp timestamp;
  Seq seq = 0;
  TradeType type = TradeType::FS;
  Units omega = 0;      // executed volume
  Units remainder = 0;  // unexecuted part resting on the book
  int levels_touched = 0;
  Ratio impact{};
  double r = 0.0;  // impact.value()
  BookSnapshot pre;
  BookSnapshot post;
};

// Four-way typology from the initiating side and the unexecuted remainder.
TradeType classify(Side side, Units remainder);

// (a1+ + b1+ - a1- - b1-) / (a1- + b1-), exact; both snapshots two-sided.
Ratio immediate_return(const BookSnapshot& pre, const BookSnapshot& post);

struct TypeStats {
  std::size_t count = 0;
  double mean_r = std::numeric_limits<double>::quiet_NaN();
  double mean_omega = std::numeric_limits<double>::quiet_NaN();
  double zero_return_fraction = std::numeric_limits<double>::quiet_NaN();

  bool present() const { return count > 0; }
};

// Per-instrument basic statistics: per-type mean returns and trade sizes,
// trade count, fraction of partially filled trades, per-type zero-return
// fractions, and the buy/sell symmetry diagnostics <r_PB>+<r_PS> and
// <r_FB>+<r_FS> (reported, not asserted: data dependent).
struct StockStats {
  std::string instrument;
  std::size_t n_trades = 0;
  std::array<TypeStats, kTradeTypes> per_type{};
  double partial_fraction = 0.0;  // F
  double symmetry_partial = std::numeric_limits<double>::quiet_NaN();
  double symmetry_filled = std::numeric_limits<double>::quiet_NaN();

  const TypeStats& of(TradeType t) const { return per_type[static_cast<int>(t)]; }
};

StockStats compute_stock_stats(const std::string& instrument, std::span<const TradeRecord> trades);

// Compensated (Neumaier) summation; the normalization identities downstream
// are asserted at 1e-12, tighter than a naive accumulation guarantees.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double total() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace impactlab
