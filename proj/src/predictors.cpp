#include "zoo/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "zoo/errors.hpp"
#include "zoo/parallel.hpp"
#include "zoo/random.hpp"
#include "zoo/stats.hpp"

namespace zoo {

std::vector<std::string> arbitrage_variables() {
  return {var::kLogHoldingPeriod, var::kLogMktcapLongShort, var::kLogMktcapShort, var::kLiquidity};
}

std::vector<std::string> overfitting_variables() {
  return {var::kDummyTstat,  var::kLogQSpan,     var::kDiffBestQ,     var::kDummyFields,
          var::kDummyOperations, var::kSqrtMonthsIs, var::kLogStdSubset, var::kDiffDropData};
}

CovariateTable::CovariateTable(std::vector<std::string> factor_names, std::vector<std::string> variable_names)
    : factors(std::move(factor_names)), variables(std::move(variable_names)),
      values(factors.size() * variables.size(), kMissing) {}

std::optional<std::size_t> CovariateTable::variable_index(const std::string& name) const {
  auto it = std::find(variables.begin(), variables.end(), name);
  if (it == variables.end()) return std::nullopt;
  return static_cast<std::size_t>(it - variables.begin());
}

std::vector<double> CovariateTable::column(std::size_t v) const {
  std::vector<double> c(factors.size());
  for (std::size_t f = 0; f < factors.size(); ++f) c[f] = (*this)(f, v);
  return c;
}

std::vector<double> CovariateTable::column(const std::string& name) const {
  auto v = variable_index(name);
  if (!v) throw ConfigError("unknown covariate '" + name + "'");
  return column(*v);
}

namespace {

// Leg-weighted average of `x` relative to the pool average, per date.
// `combine` receives (long average, short average) and returns the factor value.
template <typename Combine>
std::vector<double> relative_leg_series(const WeightMatrix& weights, const Panel& x, const char* what,
                                        Combine combine) {
  if (weights.stocks() != x.stocks()) throw DataError(std::string(what) + " panel has a different stock axis");
  std::unordered_map<std::int64_t, std::size_t> x_row;
  for (std::size_t t = 0; t < x.n_dates(); ++t) x_row[x.dates()[t].month_index()] = t;

  std::vector<double> series;
  for (std::size_t t = 0; t < weights.n_dates(); ++t) {
    auto it = x_row.find(weights.dates()[t].month_index());
    if (it == x_row.end()) continue;
    auto w = weights.row(t);
    auto v = x.row(it->second);
    double pool_sum = 0.0;
    std::size_t pool_n = 0;
    double long_wx = 0.0, long_w = 0.0, short_wx = 0.0, short_w = 0.0;
    for (std::size_t s = 0; s < w.size(); ++s) {
      if (is_missing(v[s])) continue;
      pool_sum += v[s];
      ++pool_n;
      if (w[s] > 0) {
        long_wx += w[s] * v[s];
        long_w += w[s];
      } else if (w[s] < 0) {
        short_wx += w[s] * v[s];
        short_w += w[s];
      }
    }
    if (long_w == 0.0 || short_w == 0.0) continue;
    if (pool_sum == 0.0) throw DataError(std::string(what) + ": pool sum is zero on " + weights.dates()[t].iso());
    const double rel = static_cast<double>(pool_n) / pool_sum;
    series.push_back(combine(long_wx / long_w, short_wx / short_w) * rel);
  }
  if (series.empty()) throw DataError(std::string(what) + ": no date with both legs observed");
  return series;
}

void require_positive_where_held(const WeightMatrix& weights, const Panel& x, const char* what) {
  std::unordered_map<std::int64_t, std::size_t> x_row;
  for (std::size_t t = 0; t < x.n_dates(); ++t) x_row[x.dates()[t].month_index()] = t;
  for (std::size_t t = 0; t < weights.n_dates(); ++t) {
    auto it = x_row.find(weights.dates()[t].month_index());
    if (it == x_row.end()) continue;
    for (std::size_t s = 0; s < weights.n_stocks(); ++s) {
      const double v = x(it->second, s);
      if (weights(t, s) != 0.0 && !is_missing(v) && !(v > 0.0)) {
        throw DataError(std::string(what) + " must be positive for held stock " + weights.stocks()[s] + " on " +
                        weights.dates()[t].iso());
      }
    }
  }
}

}  // namespace

double holding_period_var(const WeightMatrix& weights) {
  const double h = holding_period(weights);
  if (!std::isfinite(h)) throw DataError("holding period is infinite: no stock ever changes weight");
  if (!(h > 0.0)) throw DataError("holding period must be positive");
  return std::log(h);
}

double amihud_liquidity_var(const WeightMatrix& weights, const Panel& returns, const Panel& volume) {
  if (returns.stocks() != volume.stocks()) throw DataError("returns and volume have different stock axes");
  require_positive_where_held(weights, volume, "volume");
  // Liquidity -|r|/V on the volume axes; missing where either input is.
  std::vector<double> liq(volume.n_dates() * volume.n_stocks(), kMissing);
  for (std::size_t t = 0; t < volume.n_dates(); ++t) {
    auto r_row = returns.date_index(volume.dates()[t]);
    if (!r_row) continue;
    for (std::size_t s = 0; s < volume.n_stocks(); ++s) {
      const double r = returns(*r_row, s);
      const double v = volume(t, s);
      if (is_missing(r) || is_missing(v)) continue;
      if (!(v > 0.0)) continue;
      liq[t * volume.n_stocks() + s] = -std::abs(r) / v;
    }
  }
  const Panel liquidity = volume.with_values(std::move(liq));
  auto series = relative_leg_series(weights, liquidity, "liquidity",
                                    [](double l, double s) { return 0.5 * (l + s); });
  return stats::median(std::move(series));
}

double mktcap_ratio_var(const WeightMatrix& weights, const Panel& marketcap, CapLeg leg) {
  require_positive_where_held(weights, marketcap, "market cap");
  auto series = relative_leg_series(weights, marketcap, "market cap", [leg](double l, double s) {
    return leg == CapLeg::both ? 0.5 * (l + s) : s;
  });
  const double m = stats::median(std::move(series));
  if (!(m > 0.0)) throw DataError("market-cap ratio median is not positive");
  return std::log(m);
}

int dummy_tstat(const SharpeReport& report) { return report.t_stat < 3.0 ? 1 : 0; }

std::map<double, double> sharpe_by_quantile(const StrategyContext& ctx, std::span<const double> q_set) {
  std::map<double, double> out;
  for (double q : q_set) out[q] = sharpe(ctx.pnl(q), ctx.window()).sr_annual;
  return out;
}

double log_quantile_span(std::span<const double> sr_by_q, double sr_is) {
  if (!(sr_is > 0.0)) throw ConfigError("log quantile span needs a positive in-sample Sharpe");
  if (sr_by_q.empty()) throw ConfigError("log quantile span needs at least one quantile");
  const double sd = stats::population_sd(sr_by_q);
  if (sd == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(sd / sr_is);
}

double log_quantile_span(const StrategyContext& ctx, std::span<const double> q_set, double sr_is) {
  std::vector<double> sr;
  for (const auto& [q, v] : sharpe_by_quantile(ctx, q_set)) sr.push_back(v);
  return log_quantile_span(sr, sr_is);
}

double deviation_from_best_q(const std::map<double, double>& sr_by_q, double sr_baseline) {
  if (sr_by_q.empty()) throw ConfigError("deviation from best q needs at least one quantile");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [q, sr] : sr_by_q) best = std::max(best, sr);
  return best - sr_baseline;
}

int dummy_fields(const FactorSpec& spec) { return spec.n_fields > 2 ? 1 : 0; }
int dummy_operations(const FactorSpec& spec) { return spec.n_operations > 2 ? 1 : 0; }

double months_in_sample_var(const FactorSpec& spec) {
  const auto months = spec.in_sample().months();
  if (months < 1) throw DataError("factor " + spec.name + " has an empty in-sample window");
  return -std::sqrt(static_cast<double>(months));
}

double log_subset_std(const StrategyContext& ctx, double q, const SubsetOptions& options) {
  if (!(options.drop_frac > 0.0 && options.drop_frac < 1.0)) throw ConfigError("drop fraction must lie in (0, 1)");
  if (options.n_draws < 2) throw ConfigError("subset resampling needs at least two draws");
  const Panel& signal = ctx.signal();

  auto n_drop = [&](std::size_t n) {
    return static_cast<std::size_t>(std::floor(options.drop_frac * static_cast<double>(n) + 1e-9));
  };
  bool any = false;
  if (options.per_date) {
    for (std::size_t t = 0; t < signal.n_dates() && !any; ++t) any = n_drop(signal.count_present(t)) > 0;
  } else {
    any = n_drop(signal.n_stocks()) > 0;
  }
  if (!any) throw DataError("pool too small to drop any stock");

  std::vector<double> sr(options.n_draws);
  parallel_for(options.n_draws, [&](std::size_t d) {
    auto rng = make_rng(options.seed, d);
    std::vector<double> masked(signal.values().begin(), signal.values().end());
    const std::size_t n = signal.n_stocks();
    if (options.per_date) {
      std::vector<std::size_t> present;
      for (std::size_t t = 0; t < signal.n_dates(); ++t) {
        present.clear();
        for (std::size_t s = 0; s < n; ++s) {
          if (!is_missing(signal(t, s))) present.push_back(s);
        }
        for (auto i : sample_indices(rng, present.size(), n_drop(present.size()))) {
          masked[t * n + present[i]] = kMissing;
        }
      }
    } else {
      for (auto s : sample_indices(rng, n, n_drop(n))) {
        for (std::size_t t = 0; t < signal.n_dates(); ++t) masked[t * n + s] = kMissing;
      }
    }
    sr[d] = sharpe(ctx.pnl(signal.with_values(std::move(masked)), q), ctx.window()).sr_annual;
  });
  const double sd = stats::sample_sd(sr);
  if (!(sd > 0.0)) return -std::numeric_limits<double>::infinity();
  return std::log(sd);
}

double diff_sharpe_drop_data(const WeightMatrix& weights, const Panel& returns, const DropDataOptions& options) {
  if (!(options.drop_frac > 0.0 && options.drop_frac < 1.0)) throw ConfigError("drop fraction must lie in (0, 1)");
  const Panel c = contributions(weights, returns);
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < c.values().size(); ++i) {
    if (!is_missing(c.values()[i])) cells.push_back(i);
  }
  const auto needed = static_cast<std::size_t>(std::ceil(1.0 / options.drop_frac - 1e-9));
  if (cells.size() < needed) {
    throw DataError("need at least " + std::to_string(needed) + " contributions, found " +
                    std::to_string(cells.size()));
  }
  const auto n_drop = static_cast<std::size_t>(std::floor(options.drop_frac * static_cast<double>(cells.size()) + 1e-9));
  auto key = [&](std::size_t i) {
    const double v = c.values()[i];
    return options.by_absolute_value ? std::abs(v) : v;
  };
  std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(n_drop), cells.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (key(a) != key(b)) return key(a) > key(b);
                      return a < b;
                    });
  std::vector<bool> dropped(c.values().size(), false);
  for (std::size_t i = 0; i < n_drop; ++i) dropped[cells[i]] = true;

  PnLSeries full{c.dates(), std::vector<double>(c.n_dates(), 0.0), false};
  PnLSeries trimmed = full;
  for (std::size_t t = 0; t < c.n_dates(); ++t) {
    for (std::size_t s = 0; s < c.n_stocks(); ++s) {
      const std::size_t i = t * c.n_stocks() + s;
      const double v = c.values()[i];
      if (is_missing(v)) continue;
      full.returns[t] += v;
      if (!dropped[i]) trimmed.returns[t] += v;
    }
  }
  return sharpe(full).sr_annual - sharpe(trimmed).sr_annual;
}

double publication_date_var(const Date& publication_date) {
  if (publication_date.year() < 1900) throw DataError("publication date before 1900");
  return static_cast<double>(publication_date.unix_seconds());
}

CovariateTable standardize(const CovariateTable& table) {
  CovariateTable out = table;
  for (std::size_t v = 0; v < table.variables.size(); ++v) {
    std::vector<double> present;
    for (double x : table.column(v)) {
      if (std::isfinite(x)) present.push_back(x);
    }
    if (std::set<double>(present.begin(), present.end()).size() < 2) {
      throw DataError("cannot standardize constant covariate '" + table.variables[v] + "'");
    }
    const double m = stats::mean(present);
    const double sd = stats::sample_sd(present);
    for (std::size_t f = 0; f < table.factors.size(); ++f) {
      const double x = table(f, v);
      out(f, v) = std::isfinite(x) ? (x - m) / sd : kMissing;
    }
  }
  out.standardized = true;
  return out;
}

VulnerabilityScores vulnerability_scores(const CovariateTable& table, std::span<const std::string> arb_vars,
                                         std::span<const std::string> overfit_vars) {
  if (!table.standardized) throw ConfigError("vulnerability scores need a standardized covariate table");
  auto resolve = [&](std::span<const std::string> names) {
    std::vector<std::size_t> idx;
    for (const auto& n : names) {
      auto v = table.variable_index(n);
      if (!v) throw ConfigError("unknown covariate '" + n + "'");
      idx.push_back(*v);
    }
    return idx;
  };
  const auto arb = resolve(arb_vars);
  const auto ovf = resolve(overfit_vars);
  auto row_mean = [&](std::size_t f, const std::vector<std::size_t>& cols, const char* set) {
    double sum = 0.0;
    std::size_t n = 0;
    for (auto v : cols) {
      const double x = table(f, v);
      if (is_missing(x)) continue;
      sum += x;
      ++n;
    }
    if (n == 0) throw DataError("factor " + table.factors[f] + " has no " + set + " covariate");
    return sum / static_cast<double>(n);
  };
  VulnerabilityScores out{table.factors, {}, {}};
  for (std::size_t f = 0; f < table.factors.size(); ++f) {
    out.arbitrage.push_back(row_mean(f, arb, "arbitrage"));
    out.overfitting.push_back(row_mean(f, ovf, "overfitting"));
  }
  return out;
}

std::vector<SummaryRow> summarize(const CovariateTable& table, std::span<const std::string> variables) {
  std::vector<SummaryRow> rows;
  for (const auto& name : variables) {
    std::vector<double> x;
    for (double v : table.column(name)) {
      if (std::isfinite(v)) x.push_back(v);
    }
    SummaryRow r{name, kMissing, kMissing, kMissing, kMissing, x.size()};
    if (!x.empty()) {
      r.mean = stats::mean(x);
      r.median = stats::median(x);
      r.q1 = stats::quantile(x, 0.25);
      r.q3 = stats::quantile(x, 0.75);
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace zoo
