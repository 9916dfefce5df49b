#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "zoo/date.hpp"
#include "zoo/portfolio.hpp"

namespace zoo {

struct SharpeReport {
  double sr_annual = 0.0;
  double t_stat = 0.0;  // sr_annual * sqrt(n_months / 12)
  std::size_t n_months = 0;
  DateRange window;
};

// Annualized Sharpe of the monthly PnL inside `window` (sample sd).
// Throws DataError with fewer than 12 months or zero dispersion.
SharpeReport sharpe(const PnLSeries& pnl, const DateRange& window);
SharpeReport sharpe(const PnLSeries& pnl);

double discount_ratio(double sr_oos, double sr_is);

// SR * sqrt(n_ref / n_pool).
double size_adjust_simple(double sr_pool, double n_pool, double n_ref);

struct TwoStepOptions {
  std::vector<std::size_t> n_grid;  // empty: default_n_grid(pool size)
  std::size_t draws_per_n = 50;
  std::uint64_t seed = 1;
  double n_ref = 0.0;  // reference size for the simple adjustment; 0 = pool size
};

struct SizeAdjustedSharpe {
  double raw = 0.0;
  double simple = 0.0;
  double two_step_intercept = 0.0;
  double two_step_slope = 0.0;
  std::size_t two_step_draws = 0;
  std::vector<std::size_t> n_grid;
  std::vector<double> sr_by_n;  // mean annualized Sharpe per grid size
  double n_pool = 0.0;
  double n_ref = 0.0;
};

// Five log-spaced subsample sizes from pool/8 to pool/2.
std::vector<std::size_t> default_n_grid(std::size_t pool_size);

// Averages the Sharpe of strategies rebuilt on random subsamples holding n
// names per date on average, regresses the averages on 1/n and reports the
// intercept. The default grid is sized on the average names per date. Every
// draw has its own random stream, so the result only depends on the seed.
SizeAdjustedSharpe size_adjust_two_step(const StrategyContext& ctx, double q, const TwoStepOptions& options);

struct EventStudyOptions {
  int horizon_days = 2000;
  // Annualized volatility every factor is scaled to; <= 0 disables scaling.
  double target_annual_vol = 0.10;
  std::size_t min_pre_months = 12;
};

struct EventPoint {
  int month_offset = 0;
  double day_offset = 0.0;
  double value = 0.0;
  std::size_t n_factors = 0;
};

// Average cumulative PnL around publication, each factor detrended by the
// least-squares line fitted to its own pre-publication months.
std::vector<EventPoint> event_study(std::span<const PnLSeries> pnls, std::span<const Date> publication_dates,
                                    const EventStudyOptions& options = {});

}  // namespace zoo
