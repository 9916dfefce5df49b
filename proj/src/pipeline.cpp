#include "zoo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "zoo/errors.hpp"
#include "zoo/parallel.hpp"
#include "zoo/stats.hpp"

namespace zoo {

namespace {

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

std::uint64_t derive_seed(std::uint64_t base, std::size_t factor, std::size_t purpose) {
  return base * 1000003ULL + static_cast<std::uint64_t>(factor) * 16ULL + purpose;
}

const DatedSeries* hedge_series(const Dataset& data, const RunConfig& config) {
  return config.hedge && data.market ? &*data.market : nullptr;
}

// Post-publication evaluation window, or nullopt when there are no PnL dates
// after publication.
std::optional<DateRange> oos_window(const PnLSeries& pnl, const Date& publication) {
  for (const auto& d : pnl.dates) {
    if (d > publication) return DateRange{d, pnl.dates.back()};
  }
  return std::nullopt;
}

// Columns with at least one signal inside the window.
std::vector<std::size_t> active_columns(const Panel& signal, const DateRange& window) {
  std::vector<std::size_t> cols;
  const Panel in = signal.slice_dates(window);
  for (std::size_t s = 0; s < in.n_stocks(); ++s) {
    for (std::size_t t = 0; t < in.n_dates(); ++t) {
      if (!is_missing(in(t, s))) {
        cols.push_back(s);
        break;
      }
    }
  }
  return cols;
}

// Two-step intercept measured on `window`, with enough earlier months kept
// for the hedge estimate.
double two_step_intercept(const Panel& signal, const Panel& returns, const DatedSeries* market,
                          const RunConfig& config, const DateRange& window, double q, std::uint64_t seed) {
  const DateRange span{window.first.add_months(-(config.hedge_window + 1)), window.last};
  const auto cols = active_columns(signal, window);
  const Panel sig = signal.slice_dates(span).select_stocks(cols);
  const Panel ret = returns.slice_dates(span).select_stocks(cols);
  const StrategyContext ctx(sig, ret, market, config.hedge_window, window);
  TwoStepOptions options;
  options.draws_per_n = config.two_step_draws;
  options.seed = seed;
  return size_adjust_two_step(ctx, q, options).two_step_intercept;
}

Panel large_cap_mask(const Panel& marketcap, double share) {
  Panel mask(marketcap.dates(), marketcap.stocks());
  for (std::size_t t = 0; t < marketcap.n_dates(); ++t) {
    std::vector<std::size_t> present;
    for (std::size_t s = 0; s < marketcap.n_stocks(); ++s) {
      if (!is_missing(marketcap(t, s))) present.push_back(s);
    }
    std::stable_sort(present.begin(), present.end(),
                     [&](std::size_t a, std::size_t b) { return marketcap(t, a) > marketcap(t, b); });
    const auto k = static_cast<std::size_t>(std::floor(share * static_cast<double>(present.size())));
    for (std::size_t i = 0; i < present.size(); ++i) mask(t, present[i]) = i < k ? 1.0 : 0.0;
  }
  return mask;
}

Panel apply_mask(const Panel& signal, const Panel& mask) {
  std::vector<double> v(signal.values().begin(), signal.values().end());
  const auto m = mask.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (m[i] != 1.0) v[i] = kMissing;
  }
  return signal.with_values(std::move(v));
}

std::vector<std::string> resolve_vars(const CovariateTable& table, const std::vector<std::string>& requested,
                                      std::vector<std::string> fallback) {
  auto vars = requested.empty() ? std::move(fallback) : requested;
  for (const auto& v : vars) {
    if (!table.variable_index(v)) throw ConfigError("unknown covariate '" + v + "'");
  }
  return vars;
}

std::size_t finite_count(const std::vector<double>& x) {
  return static_cast<std::size_t>(std::count_if(x.begin(), x.end(), [](double v) { return std::isfinite(v); }));
}

}  // namespace

MetricsRow FactorMeasurement::metrics_row() const {
  return MetricsRow{name,     is.sr_annual,  oos ? oos->sr_annual : kMissing, is.t_stat,
                    discount, sr_simple_adj, sr_two_step};
}

Dataset make_synthetic_dataset(const ZooParams& params) {
  auto zoo = generate_zoo(params);
  Dataset data;
  data.pools.push_back(make_pool("large_cap", large_cap_mask(zoo.marketcap, 0.4)));
  data.returns = std::move(zoo.returns);
  data.volume = std::move(zoo.volume);
  data.marketcap = std::move(zoo.marketcap);
  data.market = std::move(zoo.market_returns);
  data.factors = std::move(zoo.factors);
  std::sort(data.factors.begin(), data.factors.end(),
            [](const FactorSpec& a, const FactorSpec& b) { return a.name < b.name; });
  return data;
}

Dataset load_dataset(const RunConfig& config) {
  config.validate();
  if (config.synthetic_mode()) return make_synthetic_dataset(config.synthetic);

  std::vector<Panel> panels;
  panels.push_back(load_panel(config.returns, PanelKind::returns));
  const bool has_volume = !config.volume.empty();
  const bool has_cap = !config.marketcap.empty();
  if (has_volume) panels.push_back(load_panel(config.volume, PanelKind::volume));
  if (has_cap) panels.push_back(load_panel(config.marketcap, PanelKind::marketcap));
  auto factors = load_factor_specs(config.factors);
  if (factors.empty()) throw DataError(config.factors.string() + ": no factors listed");
  for (const auto& f : factors) panels.push_back(f.signal);
  for (const auto& [name, path] : config.pools) panels.push_back(load_panel(path, PanelKind::mask));

  auto aligned = align(panels);
  Dataset data;
  std::size_t i = 0;
  data.returns = std::move(aligned[i++]);
  if (has_volume) data.volume = std::move(aligned[i++]);
  if (has_cap) data.marketcap = std::move(aligned[i++]);
  for (auto& f : factors) {
    f.signal = config.embargo > 0 ? embargo_shift(aligned[i], config.embargo) : std::move(aligned[i]);
    ++i;
  }
  for (const auto& [name, path] : config.pools) data.pools.push_back(make_pool(name, std::move(aligned[i++])));
  if (!config.market.empty()) data.market = load_series(config.market);

  std::set<std::string> names;
  for (const auto& f : factors) {
    if (!names.insert(f.name).second) throw DataError("duplicate factor name '" + f.name + "'");
  }
  std::sort(factors.begin(), factors.end(), [](const FactorSpec& a, const FactorSpec& b) { return a.name < b.name; });
  data.factors = std::move(factors);
  return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "signals");
  save_panel(data.returns, dir / "returns.csv");
  std::ofstream cfg(dir / "dataset.cfg");
  if (!cfg) throw DataError("cannot write " + (dir / "dataset.cfg").string());
  cfg << "returns=returns.csv\n";
  if (data.volume) {
    save_panel(*data.volume, dir / "volume.csv");
    cfg << "volume=volume.csv\n";
  }
  if (data.marketcap) {
    save_panel(*data.marketcap, dir / "marketcap.csv");
    cfg << "marketcap=marketcap.csv\n";
  }
  if (data.market) {
    save_series(*data.market, dir / "market.csv", "market");
    cfg << "market=market.csv\n";
  }
  std::vector<FactorMetadata> meta;
  for (const auto& f : data.factors) {
    const fs::path rel = fs::path("signals") / (f.name + ".csv");
    save_panel(f.signal, dir / rel);
    meta.push_back(FactorMetadata{f.name, f.publication_date, f.in_sample_start, f.in_sample_end, f.n_fields,
                                  f.n_operations, f.baseline_quantile, rel});
  }
  save_factor_metadata(meta, dir / "factors.csv");
  cfg << "factors=factors.csv\n";
  for (const auto& p : data.pools) {
    const std::string file = "pool_" + p.name + ".csv";
    save_panel(p.member_mask, dir / file);
    cfg << "pool." << p.name << '=' << file << '\n';
  }
  // Signals are written as tradable at their own dates.
  cfg << "embargo=0\n";
}

std::vector<FactorMeasurement> measure_factors(const Dataset& data, const RunConfig& config, bool with_two_step) {
  const DatedSeries* market = hedge_series(data, config);
  std::vector<FactorMeasurement> out(data.factors.size());
  parallel_for(out.size(), [&](std::size_t i) {
    const FactorSpec& spec = data.factors[i];
    FactorMeasurement& m = out[i];
    m.name = spec.name;
    const double q = spec.baseline_quantile;
    const StrategyContext ctx(spec.signal, data.returns, market, config.hedge_window);
    try {
      m.pnl = ctx.pnl(q);
    } catch (const DataError& e) {
      m.exclusion_reason = std::string("strategy: ") + e.what();
      return;
    }
    try {
      m.is = sharpe(m.pnl, spec.in_sample());
    } catch (const DataError& e) {
      m.exclusion_reason = std::string("in-sample: ") + e.what();
      return;
    }
    const auto window = oos_window(m.pnl, spec.publication_date);
    if (!window) {
      m.exclusion_reason = "no post-publication months";
      return;
    }
    try {
      m.oos = sharpe(m.pnl, *window);
    } catch (const DataError& e) {
      m.exclusion_reason = std::string("post-publication: ") + e.what();
      return;
    }
    m.n_is = average_present(spec.signal.slice_dates(spec.in_sample()));
    m.n_oos = average_present(spec.signal.slice_dates(*window));
    if (m.is.sr_annual != 0.0) m.discount = discount_ratio(m.oos->sr_annual, m.is.sr_annual);
    if (m.n_is > 0.0 && m.n_oos > 0.0) m.sr_simple_adj = size_adjust_simple(m.oos->sr_annual, m.n_oos, m.n_is);

    if (!with_two_step || !config.two_step) return;
    try {
      m.sr_two_step = two_step_intercept(spec.signal, data.returns, market, config, *window, q,
                                         derive_seed(config.seed, i, 0));
      m.sr_two_step_is = two_step_intercept(spec.signal, data.returns, market, config, spec.in_sample(), q,
                                            derive_seed(config.seed, i, 1));
    } catch (const std::exception& e) {
      warn("factor " + spec.name + ": two-step adjustment skipped: " + e.what());
    }
  });
  return out;
}

FilterResult filter_factors(std::span<const SharpeReport> reports, double threshold) {
  FilterResult r;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    (reports[i].sr_annual >= threshold ? r.included : r.excluded).push_back(i);
  }
  return r;
}

void apply_filter(std::vector<FactorMeasurement>& measurements, double threshold) {
  std::vector<std::size_t> measurable;
  std::vector<SharpeReport> reports;
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    measurements[i].included = false;
    if (measurements[i].exclusion_reason.empty()) {
      measurable.push_back(i);
      reports.push_back(measurements[i].is);
    }
  }
  const auto r = filter_factors(reports, threshold);
  for (auto j : r.included) measurements[measurable[j]].included = true;
  for (auto j : r.excluded) {
    measurements[measurable[j]].exclusion_reason = "in-sample Sharpe below " + format_number(threshold);
  }
  if (r.included.empty()) warn("no factor passes the in-sample Sharpe threshold");
}

CovariateTable compute_covariates(const Dataset& data, std::span<const FactorMeasurement> measurements,
                                  const RunConfig& config) {
  std::vector<std::size_t> rows;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    if (measurements[i].included) {
      rows.push_back(i);
      names.push_back(measurements[i].name);
    }
  }
  auto variables = arbitrage_variables();
  for (auto& v : overfitting_variables()) variables.push_back(std::move(v));
  variables.emplace_back(var::kPublished);
  CovariateTable table(names, variables);

  const DatedSeries* market = hedge_series(data, config);
  parallel_for(rows.size(), [&](std::size_t r) {
    const std::size_t i = rows[r];
    const FactorSpec& spec = data.factors[i];
    const FactorMeasurement& m = measurements[i];
    const double q = spec.baseline_quantile;
    const DateRange through{data.returns.dates().front(), spec.in_sample_end};
    const DateRange in_sample = spec.in_sample();
    const Panel sig = spec.signal.slice_dates(through);
    const Panel ret = data.returns.slice_dates(through);
    const StrategyContext ctx(sig, ret, market, config.hedge_window, in_sample);
    const WeightMatrix all_weights = quantile_weights(sig, q);
    const WeightMatrix weights(all_weights.panel().slice_dates(in_sample));
    // Weight rows one month earlier pair with the in-sample return months.
    const WeightMatrix lagged(all_weights.panel().slice_dates({in_sample.first.add_months(-1), in_sample.last}));
    const Panel ret_in = data.returns.slice_dates(in_sample);

    auto set = [&](const char* name, auto&& compute) {
      const auto v = *table.variable_index(name);
      try {
        table(r, v) = static_cast<double>(compute());
      } catch (const DataError& e) {
        warn("factor " + spec.name + ": " + name + " left missing: " + e.what());
      }
    };
    set(var::kLogHoldingPeriod, [&] { return holding_period_var(weights); });
    if (data.volume) set(var::kLiquidity, [&] { return amihud_liquidity_var(weights, data.returns, *data.volume); });
    if (data.marketcap) {
      set(var::kLogMktcapLongShort, [&] { return mktcap_ratio_var(weights, *data.marketcap, CapLeg::both); });
      set(var::kLogMktcapShort, [&] { return mktcap_ratio_var(weights, *data.marketcap, CapLeg::short_only); });
    }
    set(var::kDummyTstat, [&] { return dummy_tstat(m.is); });
    std::map<double, double> by_q;
    try {
      by_q = sharpe_by_quantile(ctx, config.q_set);
    } catch (const DataError& e) {
      warn("factor " + spec.name + ": quantile sweep failed: " + e.what());
    }
    if (!by_q.empty()) {
      std::vector<double> srs;
      for (const auto& [qq, sr] : by_q) srs.push_back(sr);
      set(var::kLogQSpan, [&] { return log_quantile_span(srs, m.is.sr_annual); });
      set(var::kDiffBestQ, [&] { return deviation_from_best_q(by_q, m.is.sr_annual); });
    }
    set(var::kDummyFields, [&] { return dummy_fields(spec); });
    set(var::kDummyOperations, [&] { return dummy_operations(spec); });
    set(var::kSqrtMonthsIs, [&] { return months_in_sample_var(spec); });
    set(var::kLogStdSubset, [&] {
      SubsetOptions o;
      o.drop_frac = config.drop_frac_subset;
      o.n_draws = config.n_draws;
      o.seed = derive_seed(config.seed, i, 2);
      o.per_date = config.subset_per_date;
      return log_subset_std(ctx, q, o);
    });
    set(var::kDiffDropData, [&] {
      return diff_sharpe_drop_data(lagged, ret_in, DropDataOptions{config.drop_frac_contrib, config.drop_by_absolute});
    });
    set(var::kPublished, [&] { return publication_date_var(spec); });
  });
  return table;
}

CovariateTable standardize_available(const CovariateTable& raw) {
  std::vector<std::string> usable;
  for (std::size_t v = 0; v < raw.variables.size(); ++v) {
    std::set<double> distinct;
    for (double x : raw.column(v)) {
      if (std::isfinite(x)) distinct.insert(x);
    }
    if (distinct.size() >= 2) {
      usable.push_back(raw.variables[v]);
    } else {
      warn("covariate " + raw.variables[v] + " has fewer than two distinct values and is left missing");
    }
  }
  CovariateTable out(raw.factors, raw.variables);
  out.standardized = true;
  if (usable.empty()) return out;
  CovariateTable sub(raw.factors, usable);
  for (std::size_t v = 0; v < usable.size(); ++v) {
    const auto src = *raw.variable_index(usable[v]);
    for (std::size_t f = 0; f < raw.factors.size(); ++f) sub(f, v) = raw(f, src);
  }
  const auto z = standardize(sub);
  for (std::size_t v = 0; v < usable.size(); ++v) {
    const auto dst = *out.variable_index(usable[v]);
    for (std::size_t f = 0; f < raw.factors.size(); ++f) out(f, dst) = z(f, v);
  }
  return out;
}

RegressionOutputs run_regressions(const CovariateTable& standardized, std::span<const double> discounts,
                                  std::span<const double> publication_year, const RunConfig& config) {
  const std::size_t n = standardized.factors.size();
  if (discounts.size() != n || publication_year.size() != n) {
    throw ConfigError("regressions need one discount ratio and publication year per factor");
  }
  RegressionOutputs out;
  out.arb_vars = resolve_vars(standardized, config.arb_vars, arbitrage_variables());
  out.overfit_vars = resolve_vars(standardized, config.overfit_vars, overfitting_variables());
  const OlsOptions options{true, config.robust_se};

  auto battery = [&](const std::vector<std::string>& vars, std::vector<OlsResult>& dst) {
    for (const auto& v : vars) {
      const Regressor r{v, standardized.column(v)};
      try {
        dst.push_back(ols(discounts, std::span<const Regressor>(&r, 1), options));
      } catch (const DataError& e) {
        warn("regression on " + v + " skipped: " + e.what());
      }
    }
  };
  battery(out.arb_vars, out.arbitrage);
  auto overfit_with_date = out.overfit_vars;
  overfit_with_date.emplace_back(var::kPublished);
  battery(overfit_with_date, out.overfitting);

  auto correlations = [&](const std::vector<std::string>& vars) -> std::optional<NamedMatrix> {
    std::vector<std::string> present;
    for (const auto& v : vars) {
      if (finite_count(standardized.column(v)) >= 2) present.push_back(v);
    }
    try {
      if (present.size() >= 2) return correlation_matrix(standardized, present);
    } catch (const DataError& e) {
      warn(std::string("correlation matrix skipped: ") + e.what());
    }
    return std::nullopt;
  };
  out.corr_arbitrage = correlations(out.arb_vars);
  out.corr_overfitting = correlations(out.overfit_vars);

  // Factors without any constituent get missing scores and drop out of the
  // horse race.
  out.scores.factors = standardized.factors;
  out.scores.arbitrage.assign(n, kMissing);
  out.scores.overfitting.assign(n, kMissing);
  std::vector<std::size_t> scored;
  for (std::size_t f = 0; f < n; ++f) {
    auto has_any = [&](const std::vector<std::string>& vars) {
      return std::any_of(vars.begin(), vars.end(),
                         [&](const std::string& v) { return !is_missing(standardized(f, *standardized.variable_index(v))); });
    };
    if (has_any(out.arb_vars) && has_any(out.overfit_vars)) {
      scored.push_back(f);
    } else {
      warn("factor " + standardized.factors[f] + " has no vulnerability score");
    }
  }
  if (!scored.empty()) {
    CovariateTable sub;
    sub.variables = standardized.variables;
    sub.standardized = true;
    for (auto f : scored) {
      sub.factors.push_back(standardized.factors[f]);
      for (std::size_t v = 0; v < standardized.variables.size(); ++v) sub.values.push_back(standardized(f, v));
    }
    const auto s = vulnerability_scores(sub, out.arb_vars, out.overfit_vars);
    for (std::size_t k = 0; k < scored.size(); ++k) {
      out.scores.arbitrage[scored[k]] = s.arbitrage[k];
      out.scores.overfitting[scored[k]] = s.overfitting[k];
    }
  }
  try {
    out.horse_race = horse_race(discounts, out.scores, publication_year, options);
  } catch (const DataError& e) {
    warn(std::string("horse race skipped: ") + e.what());
  }
  return out;
}

std::vector<PoolMeasurement> measure_pools(const Dataset& data, std::span<const FactorMeasurement> measurements,
                                           const RunConfig& config) {
  const DatedSeries* market = hedge_series(data, config);
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t p = 0; p < data.pools.size(); ++p) {
    for (std::size_t i = 0; i < measurements.size(); ++i) {
      if (measurements[i].included) jobs.emplace_back(p, i);
    }
  }
  std::vector<PoolMeasurement> out(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const auto [p, i] = jobs[j];
    const PoolSpec& pool = data.pools[p];
    const FactorSpec& spec = data.factors[i];
    const FactorMeasurement& m = measurements[i];
    PoolMeasurement& row = out[j];
    row.pool = pool.name;
    row.factor = spec.name;
    row.sr_is = m.is.sr_annual;

    std::optional<Date> first;
    std::optional<Date> last;
    for (std::size_t t = 0; t < pool.member_mask.n_dates(); ++t) {
      const auto r = pool.member_mask.row(t);
      if (std::find(r.begin(), r.end(), 1.0) == r.end()) continue;
      if (!first) first = pool.member_mask.dates()[t];
      last = pool.member_mask.dates()[t];
    }
    if (!first || !(first->add_months(1) <= *last)) {
      warn("pool " + pool.name + " has no usable months");
      return;
    }
    // PnL in a month comes from the previous month's holdings.
    const DateRange window{first->add_months(1), *last};
    const Panel masked = apply_mask(spec.signal, pool.member_mask);
    const double q = spec.baseline_quantile;
    try {
      const StrategyContext ctx(masked, data.returns, market, config.hedge_window, window);
      row.sr_pool = sharpe(ctx.pnl(q), window).sr_annual;
      row.n_pool = average_present(masked.slice_dates(window));
      row.n_ref = average_present(spec.signal.slice_dates(window));
      row.raw = row.sr_pool / row.sr_is;
      row.simple = size_adjust_simple(row.sr_pool, row.n_pool, row.n_ref) / row.sr_is;
      if (config.two_step && std::isfinite(m.sr_two_step_is) && m.sr_two_step_is != 0.0) {
        row.complex = two_step_intercept(masked, data.returns, market, config, window, q,
                                         derive_seed(config.seed, i, 3 + p)) /
                      m.sr_two_step_is;
      }
    } catch (const std::exception& e) {
      warn("pool " + pool.name + ", factor " + spec.name + ": " + e.what());
    }
  });
  return out;
}

void write_measurements(std::span<const FactorMeasurement> measurements, const std::filesystem::path& dir) {
  std::vector<MetricsRow> rows;
  std::vector<Date> dates;
  std::vector<std::string> names;
  for (const auto& m : measurements) {
    if (!m.included) continue;
    rows.push_back(m.metrics_row());
    names.push_back(m.name);
    dates.insert(dates.end(), m.pnl.dates.begin(), m.pnl.dates.end());
  }
  write_metrics(rows, dir / "metrics.csv");

  std::ofstream ex(dir / "exclusions.csv");
  if (!ex) throw DataError("cannot write " + (dir / "exclusions.csv").string());
  ex << "name,sr_is,reason\n";
  for (const auto& m : measurements) {
    if (m.included) continue;
    ex << m.name << ',' << (m.is.n_months ? format_number(m.is.sr_annual) : "") << ',' << m.exclusion_reason
       << '\n';
  }

  std::sort(dates.begin(), dates.end());
  dates.erase(std::unique(dates.begin(), dates.end()), dates.end());
  Panel pnl(dates, names);
  std::size_t col = 0;
  for (const auto& m : measurements) {
    if (!m.included) continue;
    for (std::size_t k = 0; k < m.pnl.size(); ++k) pnl(*pnl.date_index(m.pnl.dates[k]), col) = m.pnl.returns[k];
    ++col;
  }
  save_panel(pnl, dir / "pnl.csv");
}

void write_covariate_outputs(const CovariateTable& raw, const CovariateTable& standardized, const RunConfig& config,
                             const std::filesystem::path& dir) {
  write_covariates(raw, dir / "covariates_raw.csv");
  write_covariates(standardized, dir / "covariates_standardized.csv");
  const auto arb = resolve_vars(raw, config.arb_vars, arbitrage_variables());
  const auto ovf = resolve_vars(raw, config.overfit_vars, overfitting_variables());
  write_summary(summarize(raw, arb), dir / "summary_arbitrage.csv");
  write_summary(summarize(raw, ovf), dir / "summary_overfitting.csv");
}

void write_regression_outputs(const RegressionOutputs& outputs, const std::filesystem::path& dir) {
  write_regression_table(outputs.arbitrage, dir / "regress_arbitrage.csv");
  write_regression_table(outputs.overfitting, dir / "regress_overfitting.csv");
  write_regression_table(outputs.horse_race, dir / "horse_race.csv");
  if (outputs.corr_arbitrage) write_correlation(*outputs.corr_arbitrage, dir / "corr_arbitrage.csv");
  if (outputs.corr_overfitting) write_correlation(*outputs.corr_overfitting, dir / "corr_overfitting.csv");

  std::ofstream out(dir / "vulnerability.csv");
  if (!out) throw DataError("cannot write " + (dir / "vulnerability.csv").string());
  out << "factor,arbitrage,overfitting\n";
  for (std::size_t f = 0; f < outputs.scores.factors.size(); ++f) {
    out << outputs.scores.factors[f] << ',' << format_number(outputs.scores.arbitrage[f]) << ','
        << format_number(outputs.scores.overfitting[f]) << '\n';
  }
}

void write_pool_outputs(std::span<const PoolMeasurement> pools, const std::filesystem::path& dir) {
  std::ofstream out(dir / "pools.csv");
  if (!out) throw DataError("cannot write " + (dir / "pools.csv").string());
  out << "pool,factor,n_pool,n_ref,sr_is,sr_pool,raw,simple,complex\n";
  for (const auto& p : pools) {
    out << p.pool << ',' << p.factor << ',' << format_number(p.n_pool) << ',' << format_number(p.n_ref) << ','
        << format_number(p.sr_is) << ',' << format_number(p.sr_pool) << ',' << format_number(p.raw) << ','
        << format_number(p.simple) << ',' << format_number(p.complex) << '\n';
  }

  std::ofstream med(dir / "pools_summary.csv");
  if (!med) throw DataError("cannot write " + (dir / "pools_summary.csv").string());
  med << "pool,n_factors,median_raw,median_simple,median_complex\n";
  std::vector<std::string> names;
  for (const auto& p : pools) {
    if (std::find(names.begin(), names.end(), p.pool) == names.end()) names.push_back(p.pool);
  }
  for (const auto& name : names) {
    std::vector<double> raw, simple, complex;
    for (const auto& p : pools) {
      if (p.pool != name) continue;
      if (std::isfinite(p.raw)) raw.push_back(p.raw);
      if (std::isfinite(p.simple)) simple.push_back(p.simple);
      if (std::isfinite(p.complex)) complex.push_back(p.complex);
    }
    auto median = [](const std::vector<double>& x) { return x.empty() ? kMissing : stats::median(x); };
    med << name << ',' << raw.size() << ',' << format_number(median(raw)) << ',' << format_number(median(simple))
        << ',' << format_number(median(complex)) << '\n';
  }
}

void write_figures(const Dataset& data, std::span<const FactorMeasurement> measurements, const RunConfig& config,
                   const std::filesystem::path& dir) {
  using Points = std::vector<std::pair<std::string, std::string>>;
  Points is_oos, discount_year;
  std::vector<PnLSeries> pnls;
  std::vector<Date> publications;
  std::vector<const FactorSpec*> included;
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    const auto& m = measurements[i];
    if (!m.included) continue;
    const auto& spec = data.factors[i];
    included.push_back(&spec);
    if (m.oos) is_oos.emplace_back(format_number(m.is.sr_annual), format_number(m.oos->sr_annual));
    if (std::isfinite(m.discount)) {
      discount_year.emplace_back(format_number(spec.publication_date.fractional_year()), format_number(m.discount));
    }
    pnls.push_back(m.pnl);
    publications.push_back(spec.publication_date);
  }
  write_plot_data(dir / "fig_is_oos.dat", is_oos);
  write_plot_data(dir / "fig_discount_publication.dat", discount_year);

  // Complexity against publication date, with a trailing five-factor mean.
  std::stable_sort(included.begin(), included.end(), [](const FactorSpec* a, const FactorSpec* b) {
    return a->publication_date < b->publication_date;
  });
  auto complexity = [&](const char* stem, auto field) {
    Points points, rolling;
    for (std::size_t k = 0; k < included.size(); ++k) {
      const auto x = format_number(included[k]->publication_date.fractional_year());
      points.emplace_back(x, std::to_string(field(*included[k])));
      const std::size_t lo = k >= 4 ? k - 4 : 0;
      double sum = 0.0;
      for (std::size_t j = lo; j <= k; ++j) sum += field(*included[j]);
      rolling.emplace_back(x, format_number(sum / static_cast<double>(k - lo + 1)));
    }
    write_plot_data(dir / (std::string(stem) + ".dat"), points);
    write_plot_data(dir / (std::string(stem) + "_rolling.dat"), rolling);
  };
  complexity("fig_fields_publication", [](const FactorSpec& f) { return f.n_fields; });
  complexity("fig_operations_publication", [](const FactorSpec& f) { return f.n_operations; });

  if (!pnls.empty()) {
    EventStudyOptions options;
    options.horizon_days = config.event_horizon_days;
    options.target_annual_vol = config.event_target_vol;
    try {
      const auto curve = event_study(pnls, publications, options);
      write_event_study(curve, dir / "event_study.csv");
      Points points;
      for (const auto& p : curve) points.emplace_back(format_number(p.day_offset), format_number(p.value));
      write_plot_data(dir / "fig_event_study.dat", points);
    } catch (const DataError& e) {
      warn(std::string("event study skipped: ") + e.what());
    }
  }

  for (const auto& pool : data.pools) {
    Points points;
    for (std::size_t t = 0; t < pool.member_mask.n_dates(); ++t) {
      const auto r = pool.member_mask.row(t);
      points.emplace_back(pool.member_mask.dates()[t].iso(), std::to_string(std::count(r.begin(), r.end(), 1.0)));
    }
    write_plot_data(dir / ("fig_pool_size_" + pool.name + ".dat"), points);
  }
}

void write_publication(const Dataset& data, std::span<const FactorMeasurement> measurements,
                       const std::filesystem::path& dir) {
  std::ofstream out(dir / "publication.csv");
  if (!out) throw DataError("cannot write " + (dir / "publication.csv").string());
  out << "name,publication_date,n_fields,n_operations\n";
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    if (!measurements[i].included) continue;
    const auto& f = data.factors[i];
    out << f.name << ',' << f.publication_date.iso() << ',' << f.n_fields << ',' << f.n_operations << '\n';
  }
}

BundleContents read_bundle(const std::filesystem::path& dir) {
  const auto metrics = read_metrics(dir / "metrics.csv");
  const Panel pnl = load_panel(dir / "pnl.csv", PanelKind::returns);

  std::map<std::string, FactorSpec> specs;
  std::ifstream in(dir / "publication.csv");
  if (!in) throw DataError("cannot open " + (dir / "publication.csv").string());
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) c.push_back(cell);
    if (c.size() != 4) throw DataError("publication.csv rows need 4 cells");
    FactorSpec f;
    f.name = c[0];
    f.publication_date = f.in_sample_start = f.in_sample_end = Date::parse(c[1]);
    try {
      f.n_fields = std::stoi(c[2]);
      f.n_operations = std::stoi(c[3]);
    } catch (const std::exception&) {
      throw DataError("publication.csv: bad count for factor " + c[0]);
    }
    specs.emplace(f.name, std::move(f));
  }

  BundleContents out;
  for (const auto& row : metrics) {
    auto spec = specs.find(row.name);
    auto col = pnl.stock_index(row.name);
    if (spec == specs.end() || !col) throw DataError("bundle has no publication or PnL data for " + row.name);
    FactorMeasurement m;
    m.name = row.name;
    m.is.sr_annual = row.sr_is;
    m.is.t_stat = row.t_is;
    if (std::isfinite(row.sr_oos)) {
      m.oos = SharpeReport{};
      m.oos->sr_annual = row.sr_oos;
    }
    m.discount = row.discount;
    m.sr_simple_adj = row.sr_simple_adj;
    m.sr_two_step = row.sr_two_step;
    m.included = true;
    for (std::size_t t = 0; t < pnl.n_dates(); ++t) {
      if (is_missing(pnl(t, *col))) continue;
      m.pnl.dates.push_back(pnl.dates()[t]);
      m.pnl.returns.push_back(pnl(t, *col));
    }
    out.measurements.push_back(std::move(m));
    out.data.factors.push_back(spec->second);
  }
  return out;
}

PipelineSummary run_pipeline(const RunConfig& config) {
  config.validate();
  const auto dir = config.output_dir;
  std::filesystem::create_directories(dir);
  const Dataset data = load_dataset(config);

  auto measurements = measure_factors(data, config, true);
  apply_filter(measurements, config.sr_threshold);
  write_measurements(measurements, dir);
  write_publication(data, measurements, dir);

  const auto raw = compute_covariates(data, measurements, config);
  const auto standardized = standardize_available(raw);
  write_covariate_outputs(raw, standardized, config, dir);

  std::vector<double> discounts, years;
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    if (!measurements[i].included) continue;
    discounts.push_back(measurements[i].discount);
    years.push_back(data.factors[i].publication_date.fractional_year());
  }
  if (!discounts.empty()) {
    write_regression_outputs(run_regressions(standardized, discounts, years, config), dir);
  }
  write_pool_outputs(measure_pools(data, measurements, config), dir);
  write_figures(data, measurements, config, dir);

  std::ofstream cfg(dir / "config.cfg");
  if (!cfg) throw DataError("cannot write " + (dir / "config.cfg").string());
  // Absolute inputs, so the recorded config reloads from inside the bundle.
  RunConfig recorded = config;
  for (auto* path : {&recorded.returns, &recorded.volume, &recorded.marketcap, &recorded.market, &recorded.factors}) {
    if (!path->empty()) *path = std::filesystem::absolute(*path);
  }
  for (auto& [name, path] : recorded.pools) path = std::filesystem::absolute(path);
  cfg << to_string(recorded);

  PipelineSummary summary;
  summary.n_factors = measurements.size();
  summary.n_included = static_cast<std::size_t>(
      std::count_if(measurements.begin(), measurements.end(), [](const FactorMeasurement& m) { return m.included; }));
  summary.output_dir = dir;
  return summary;
}

}  // namespace zoo
