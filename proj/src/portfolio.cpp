#include "zoo/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "zoo/errors.hpp"
#include "zoo/stats.hpp"

namespace zoo {

namespace {

void require_same_stocks(const Panel& a, const Panel& b) {
  if (a.stocks() != b.stocks()) throw DataError("weights and returns have different stock axes; align first");
}

// Position of each stock in identifier order.
std::vector<std::size_t> identifier_rank(const std::vector<std::string>& stocks) {
  std::vector<std::size_t> order(stocks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return stocks[a] < stocks[b]; });
  std::vector<std::size_t> rank(stocks.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  return rank;
}

}  // namespace

WeightMatrix::WeightMatrix(Panel weights) : weights_(std::move(weights)) {
  for (double v : weights_.values()) {
    if (!std::isfinite(v)) throw DataError("weights must be finite");
  }
}

WeightMatrix quantile_weights(const Panel& signal, double q) {
  if (!(q > 0.0 && q <= 0.5)) throw ConfigError("quantile must lie in (0, 0.5]");
  const auto min_names = static_cast<std::size_t>(std::ceil(1.0 / q - 1e-9));
  const auto id_rank = identifier_rank(signal.stocks());
  std::vector<double> w(signal.n_dates() * signal.n_stocks(), 0.0);
  std::vector<std::size_t> present;
  present.reserve(signal.n_stocks());

  for (std::size_t t = 0; t < signal.n_dates(); ++t) {
    auto row = signal.row(t);
    present.clear();
    for (std::size_t s = 0; s < row.size(); ++s) {
      if (!is_missing(row[s])) present.push_back(s);
    }
    if (present.size() < min_names || present.size() < 2) continue;
    const auto k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(q * static_cast<double>(present.size()) + 1e-9)));
    std::sort(present.begin(), present.end(), [&](std::size_t a, std::size_t b) {
      if (row[a] != row[b]) return row[a] < row[b];
      return id_rank[a] < id_rank[b];
    });
    const double leg = 0.5 / static_cast<double>(k);
    double* out = w.data() + t * signal.n_stocks();
    for (std::size_t i = 0; i < k; ++i) {
      out[present[i]] = -leg;
      out[present[present.size() - 1 - i]] = leg;
    }
  }
  return WeightMatrix(signal.with_values(std::move(w)));
}

WeightMatrix rank_weights(const Panel& signal) {
  std::vector<double> w(signal.n_dates() * signal.n_stocks(), 0.0);
  for (std::size_t t = 0; t < signal.n_dates(); ++t) {
    auto row = signal.row(t);
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : row) {
      if (!is_missing(v)) {
        sum += v;
        ++n;
      }
    }
    if (n < 2) continue;
    const double m = sum / static_cast<double>(n);
    double gross_long = 0.0;
    double gross_short = 0.0;
    for (double v : row) {
      if (is_missing(v)) continue;
      if (v > m) gross_long += v - m;
      if (v < m) gross_short += m - v;
    }
    if (!(gross_long > 0.0) || !(gross_short > 0.0)) continue;
    double* out = w.data() + t * signal.n_stocks();
    for (std::size_t s = 0; s < row.size(); ++s) {
      if (is_missing(row[s])) continue;
      const double d = row[s] - m;
      if (d > 0) out[s] = 0.5 * d / gross_long;
      if (d < 0) out[s] = 0.5 * d / gross_short;
    }
  }
  return WeightMatrix(signal.with_values(std::move(w)));
}

Panel contributions(const WeightMatrix& weights, const Panel& returns) {
  require_same_stocks(weights.panel(), returns);
  std::unordered_map<std::int64_t, std::size_t> weight_row;
  for (std::size_t t = 0; t < weights.n_dates(); ++t) weight_row[weights.dates()[t].month_index()] = t;

  std::vector<Date> dates;
  std::vector<double> values;
  const std::size_t n = returns.n_stocks();
  for (std::size_t u = 0; u < returns.n_dates(); ++u) {
    auto it = weight_row.find(returns.dates()[u].month_index() - 1);
    if (it == weight_row.end()) continue;
    auto w = weights.row(it->second);
    auto r = returns.row(u);
    double long_total = 0.0, long_live = 0.0, short_total = 0.0, short_live = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (w[s] > 0) {
        long_total += w[s];
        if (!is_missing(r[s])) long_live += w[s];
      } else if (w[s] < 0) {
        short_total += w[s];
        if (!is_missing(r[s])) short_live += w[s];
      }
    }
    const double long_scale = long_live > 0 ? long_total / long_live : 0.0;
    const double short_scale = short_live < 0 ? short_total / short_live : 0.0;
    dates.push_back(returns.dates()[u]);
    const auto base = values.size();
    values.resize(base + n, kMissing);
    for (std::size_t s = 0; s < n; ++s) {
      if (w[s] == 0.0 || is_missing(r[s])) continue;
      values[base + s] = w[s] * (w[s] > 0 ? long_scale : short_scale) * r[s];
    }
  }
  if (dates.empty()) throw DataError("weights and returns have no overlapping months");
  return Panel(std::move(dates), returns.stocks(), std::move(values));
}

PnLSeries compute_pnl(const WeightMatrix& weights, const Panel& returns) {
  const Panel c = contributions(weights, returns);
  PnLSeries pnl{c.dates(), std::vector<double>(c.n_dates(), 0.0), false};
  for (std::size_t t = 0; t < c.n_dates(); ++t) {
    double acc = 0.0;
    for (double v : c.row(t)) {
      if (!is_missing(v)) acc += v;
    }
    pnl.returns[t] = acc;
  }
  return pnl;
}

namespace {

std::vector<double> market_on(const std::vector<Date>& dates, const DatedSeries& market) {
  std::vector<double> m(dates.size());
  for (std::size_t i = 0; i < dates.size(); ++i) {
    auto v = market.at(dates[i]);
    if (!v || is_missing(*v)) throw DataError("market return missing on " + dates[i].iso());
    m[i] = *v;
  }
  return m;
}

}  // namespace

PnLSeries beta_hedge(const PnLSeries& pnl, const DatedSeries& market, int window) {
  if (window < 12) throw ConfigError("hedge window must be at least 12 months");
  const auto w = static_cast<std::size_t>(window);
  if (w > pnl.size()) throw DataError("hedge window is longer than the PnL series");
  const auto m = market_on(pnl.dates, market);

  PnLSeries out{pnl.dates, pnl.returns, true};
  const std::span<const double> x(m);
  const std::span<const double> y(pnl.returns);
  for (std::size_t i = w; i < pnl.size(); ++i) {
    double beta = stats::ols_slope(x.subspan(i - w, w), y.subspan(i - w, w));
    if (std::isnan(beta)) beta = 0.0;
    out.returns[i] = pnl.returns[i] - beta * m[i];
  }
  return out;
}

double realized_beta(const PnLSeries& pnl, const DatedSeries& market) {
  const auto m = market_on(pnl.dates, market);
  return stats::ols_slope(m, pnl.returns);
}

double holding_period(const WeightMatrix& weights) {
  const std::size_t n_dates = weights.n_dates();
  if (n_dates < 2) throw DataError("holding period needs at least two dates");
  std::vector<double> per_stock;
  for (std::size_t s = 0; s < weights.n_stocks(); ++s) {
    double sum = 0.0, sum_sq = 0.0, turnover = 0.0;
    for (std::size_t t = 0; t < n_dates; ++t) {
      const double w = weights(t, s);
      sum += w;
      sum_sq += w * w;
      if (t > 0) turnover += std::abs(w - weights(t - 1, s));
    }
    if (turnover == 0.0) continue;
    const double mean = sum / static_cast<double>(n_dates);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n_dates) - mean * mean);
    const double mean_change = turnover / static_cast<double>(n_dates - 1);
    per_stock.push_back(2.0 * std::sqrt(var) / mean_change);
  }
  if (per_stock.empty()) return std::numeric_limits<double>::infinity();
  return stats::median(std::move(per_stock));
}

double max_leg_error(const WeightMatrix& weights) {
  double worst = 0.0;
  for (std::size_t t = 0; t < weights.n_dates(); ++t) {
    double pos = 0.0, neg = 0.0;
    for (double w : weights.row(t)) {
      if (w > 0) pos += w;
      if (w < 0) neg += w;
    }
    if (pos == 0.0 && neg == 0.0) continue;
    worst = std::max({worst, std::abs(pos - 0.5), std::abs(neg + 0.5), std::abs(pos + neg)});
  }
  return worst;
}

StrategyContext::StrategyContext(const Panel& signal, const Panel& returns, const DatedSeries* market,
                                 int hedge_window, std::optional<DateRange> window)
    : signal_(signal), returns_(returns), market_(market), hedge_window_(hedge_window) {
  require_same_stocks(signal, returns);
  if (returns.n_dates() == 0) throw DataError("strategy has no return dates");
  window_ = window.value_or(DateRange{returns.dates().front(), returns.dates().back()});
  if (market_ && hedge_window_ < 12) throw ConfigError("hedge window must be at least 12 months");
}

PnLSeries StrategyContext::pnl(const Panel& signal, double q) const {
  return pnl(quantile_weights(signal, q), returns_);
}

PnLSeries StrategyContext::pnl(const WeightMatrix& weights, const Panel& returns) const {
  auto raw = compute_pnl(weights, returns);
  if (!market_) return raw;
  return beta_hedge(raw, *market_, hedge_window_);
}

}  // namespace zoo
