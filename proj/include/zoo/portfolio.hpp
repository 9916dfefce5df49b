#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "zoo/date.hpp"
#include "zoo/panel.hpp"

namespace zoo {

// Date x stock long-short weights. Longs are positive, shorts negative, and
// every traded date carries +0.5 on the long leg and -0.5 on the short leg.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  explicit WeightMatrix(Panel weights);

  const Panel& panel() const { return weights_; }
  const std::vector<Date>& dates() const { return weights_.dates(); }
  const std::vector<std::string>& stocks() const { return weights_.stocks(); }
  std::size_t n_dates() const { return weights_.n_dates(); }
  std::size_t n_stocks() const { return weights_.n_stocks(); }
  double operator()(std::size_t t, std::size_t s) const { return weights_(t, s); }
  std::span<const double> row(std::size_t t) const { return weights_.row(t); }

 private:
  Panel weights_;
};

// Monthly strategy returns. Entry i is earned over the month ending dates[i].
struct PnLSeries {
  std::vector<Date> dates;
  std::vector<double> returns;
  bool hedged = false;

  std::size_t size() const { return dates.size(); }
};

// Equal-weighted top-q long / bottom-q short portfolio. Each leg holds
// floor(q * n_t) stocks; dates with fewer than ceil(1/q) signals stay flat.
// Ties are broken by stock identifier.
WeightMatrix quantile_weights(const Panel& signal, double q);

// Weights proportional to the demeaned signal, scaled to legs of +/-0.5.
// Same Sharpe as trading the raw rank scores.
WeightMatrix rank_weights(const Panel& signal);

// Per-stock PnL contributions w_{t,s} r_{s,t+1}, dated by the return month.
// Held stocks with a missing return drop out and the rest of their leg is
// scaled back up to the leg's gross weight. Cells not held are missing.
Panel contributions(const WeightMatrix& weights, const Panel& returns);

PnLSeries compute_pnl(const WeightMatrix& weights, const Panel& returns);

// Causal hedge: hedged_i = pnl_i - beta_{i-1} * market_i, where beta_{i-1} is
// the OLS slope over the `window` months before i. The first `window` months
// pass through unhedged.
PnLSeries beta_hedge(const PnLSeries& pnl, const DatedSeries& market, int window = 36);

// Full-sample OLS slope of the series on market returns.
double realized_beta(const PnLSeries& pnl, const DatedSeries& market);

// Cross-sectional median of 2 * sd(w_s) / mean|dw_s| over stocks that trade.
// Returns +infinity when no stock's weight ever changes.
double holding_period(const WeightMatrix& weights);

// Largest violation of dollar neutrality or of the +/-0.5 leg sums over
// traded dates.
double max_leg_error(const WeightMatrix& weights);

// Builds strategy PnL for a fixed signal/return pair, optionally beta-hedged,
// and names the window its Sharpe ratios are measured on. Holds references:
// the panels and market series must outlive the context.
class StrategyContext {
 public:
  StrategyContext(const Panel& signal, const Panel& returns, const DatedSeries* market = nullptr,
                  int hedge_window = 36, std::optional<DateRange> window = std::nullopt);

  const Panel& signal() const { return signal_; }
  const Panel& returns() const { return returns_; }
  const DatedSeries* market() const { return market_; }
  int hedge_window() const { return hedge_window_; }
  // Evaluation window; defaults to the full span of the return dates.
  DateRange window() const { return window_; }

  PnLSeries pnl(double q) const { return pnl(signal_, q); }
  // Same construction with a substitute signal on the context's axes.
  PnLSeries pnl(const Panel& signal, double q) const;
  PnLSeries pnl(const WeightMatrix& weights, const Panel& returns) const;

 private:
  const Panel& signal_;
  const Panel& returns_;
  const DatedSeries* market_;
  int hedge_window_;
  DateRange window_;
};

}  // namespace zoo
