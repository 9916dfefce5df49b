#include "zoo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "zoo/errors.hpp"
#include "zoo/factor_spec.hpp"
#include "zoo/panel.hpp"
#include "zoo/parallel.hpp"
#include "zoo/random.hpp"
#include "zoo/stats.hpp"

namespace zoo {

namespace {
constexpr double kDaysPerMonth = 365.25 / 12.0;
}

SharpeReport sharpe(const PnLSeries& pnl, const DateRange& window) {
  std::vector<double> x;
  for (std::size_t i = 0; i < pnl.size(); ++i) {
    if (window.contains(pnl.dates[i])) x.push_back(pnl.returns[i]);
  }
  if (x.size() < 12) {
    throw DataError("Sharpe window " + window.first.iso() + ".." + window.last.iso() + " holds only " +
                    std::to_string(x.size()) + " months (need 12)");
  }
  const double sd = stats::sample_sd(x);
  if (!(sd > 0.0)) throw DataError("PnL has zero standard deviation");
  SharpeReport r;
  r.sr_annual = stats::mean(x) / sd * std::sqrt(12.0);
  r.n_months = x.size();
  r.t_stat = r.sr_annual * std::sqrt(static_cast<double>(r.n_months) / 12.0);
  r.window = window;
  return r;
}

SharpeReport sharpe(const PnLSeries& pnl) {
  if (pnl.size() == 0) throw DataError("empty PnL series");
  return sharpe(pnl, DateRange{pnl.dates.front(), pnl.dates.back()});
}

double discount_ratio(double sr_oos, double sr_is) {
  if (sr_is == 0.0) throw DataError("discount ratio undefined for zero in-sample Sharpe");
  return sr_oos / sr_is;
}

double size_adjust_simple(double sr_pool, double n_pool, double n_ref) {
  if (!(n_pool > 0.0) || !(n_ref > 0.0)) throw ConfigError("pool sizes must be positive");
  return sr_pool * std::sqrt(n_ref / n_pool);
}

std::vector<std::size_t> default_n_grid(std::size_t pool_size) {
  const double lo = static_cast<double>(pool_size) / 8.0;
  const double hi = static_cast<double>(pool_size) / 2.0;
  std::vector<std::size_t> grid;
  for (int i = 0; i < 5; ++i) {
    const double v = lo * std::pow(hi / lo, i / 4.0);
    const auto n = static_cast<std::size_t>(std::llround(v));
    if (n > 0 && (grid.empty() || grid.back() != n)) grid.push_back(n);
  }
  return grid;
}

SizeAdjustedSharpe size_adjust_two_step(const StrategyContext& ctx, double q, const TwoStepOptions& options) {
  const std::size_t columns = ctx.signal().n_stocks();
  // Sizes count names held per date. When membership churns (a masked pool)
  // fewer names than columns are present, so draws take proportionally more
  // columns to land on the target size on average.
  const double n_pool = average_present(ctx.signal().slice_dates(ctx.window()));
  if (!(n_pool >= 2.0)) throw DataError("two-step adjustment needs at least two names per date");
  const auto pool = static_cast<std::size_t>(std::llround(n_pool));
  auto grid = options.n_grid.empty() ? default_n_grid(pool) : options.n_grid;
  if (std::set<std::size_t>(grid.begin(), grid.end()).size() < 2) {
    throw ConfigError("two-step adjustment needs at least two distinct subsample sizes");
  }
  for (auto n : grid) {
    if (n > pool || n < 2) throw ConfigError("subsample size " + std::to_string(n) + " outside [2, pool size]");
  }
  if (options.draws_per_n < 10) throw ConfigError("two-step adjustment needs at least 10 draws per size");
  // A subsample smaller than this never trades and has no Sharpe ratio.
  const auto min_names = static_cast<std::size_t>(std::ceil(1.0 / q - 1e-9));
  const auto smallest = *std::min_element(grid.begin(), grid.end());
  if (smallest < min_names) {
    throw DataError("subsample size " + std::to_string(smallest) + " is below the " + std::to_string(min_names) +
                    " names a q=" + format_number(q) + " portfolio needs; the pool is too small for the two-step grid");
  }

  SizeAdjustedSharpe out;
  out.n_grid = grid;
  out.two_step_draws = options.draws_per_n;
  out.raw = sharpe(ctx.pnl(q), ctx.window()).sr_annual;
  out.n_pool = n_pool;
  out.n_ref = options.n_ref > 0.0 ? options.n_ref : out.n_pool;
  out.simple = size_adjust_simple(out.raw, out.n_pool, out.n_ref);

  const double columns_per_name = static_cast<double>(columns) / n_pool;
  const std::size_t draws = options.draws_per_n;
  std::vector<double> sr(grid.size() * draws);
  parallel_for(sr.size(), [&](std::size_t job) {
    const std::size_t n = grid[job / draws];
    const auto take = std::min(columns, static_cast<std::size_t>(std::llround(static_cast<double>(n) * columns_per_name)));
    auto rng = make_rng(options.seed, job);
    const auto cols = sample_indices(rng, columns, take);
    const Panel sub_signal = ctx.signal().select_stocks(cols);
    const Panel sub_returns = ctx.returns().select_stocks(cols);
    sr[job] = sharpe(ctx.pnl(quantile_weights(sub_signal, q), sub_returns), ctx.window()).sr_annual;
  });

  std::vector<double> inv_n(grid.size());
  out.sr_by_n.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    inv_n[g] = 1.0 / static_cast<double>(grid[g]);
    out.sr_by_n[g] = stats::mean(std::span<const double>(sr).subspan(g * draws, draws));
  }
  out.two_step_slope = stats::ols_slope(inv_n, out.sr_by_n);
  out.two_step_intercept = stats::mean(out.sr_by_n) - out.two_step_slope * stats::mean(inv_n);
  return out;
}

std::vector<EventPoint> event_study(std::span<const PnLSeries> pnls, std::span<const Date> publication_dates,
                                    const EventStudyOptions& options) {
  if (pnls.size() != publication_dates.size()) {
    throw ConfigError("event study needs one publication date per PnL series");
  }
  if (options.horizon_days <= 0) throw ConfigError("event-study horizon must be positive");
  const auto horizon = static_cast<int>(std::floor(options.horizon_days / kDaysPerMonth));

  std::map<int, std::pair<double, std::size_t>> grid;
  std::size_t used = 0;
  for (std::size_t f = 0; f < pnls.size(); ++f) {
    const auto pub = publication_dates[f].month_index();
    std::vector<int> offset;
    std::vector<double> ret;
    for (std::size_t i = 0; i < pnls[f].size(); ++i) {
      const auto k = static_cast<int>(pnls[f].dates[i].month_index() - pub);
      if (k < -horizon || k > horizon) continue;
      offset.push_back(k);
      ret.push_back(pnls[f].returns[i]);
    }
    const auto pre = static_cast<std::size_t>(std::count_if(offset.begin(), offset.end(), [](int k) { return k < 0; }));
    if (pre < options.min_pre_months) continue;

    if (options.target_annual_vol > 0.0) {
      const double sd = stats::sample_sd(ret);
      if (sd > 0.0) {
        const double scale = options.target_annual_vol / (sd * std::sqrt(12.0));
        for (auto& r : ret) r *= scale;
      }
    }
    std::vector<double> cum(ret.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < ret.size(); ++i) cum[i] = acc += ret[i];

    std::vector<double> x_pre, y_pre;
    for (std::size_t i = 0; i < offset.size(); ++i) {
      if (offset[i] < 0) {
        x_pre.push_back(offset[i]);
        y_pre.push_back(cum[i]);
      }
    }
    const double slope = stats::ols_slope(x_pre, y_pre);
    const double intercept = stats::mean(y_pre) - slope * stats::mean(x_pre);
    for (std::size_t i = 0; i < offset.size(); ++i) {
      auto& cell = grid[offset[i]];
      cell.first += cum[i] - (intercept + slope * offset[i]);
      cell.second += 1;
    }
    ++used;
  }
  if (used == 0) throw DataError("no factor has enough pre-publication history for the event study");

  std::vector<EventPoint> curve;
  curve.reserve(grid.size());
  for (const auto& [k, cell] : grid) {
    curve.push_back(EventPoint{k, k * kDaysPerMonth, cell.first / static_cast<double>(cell.second), cell.second});
  }
  return curve;
}

}  // namespace zoo
