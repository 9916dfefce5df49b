#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "zoo/config.hpp"
#include "zoo/errors.hpp"
#include "zoo/metrics.hpp"
#include "zoo/panel.hpp"
#include "zoo/pipeline.hpp"
#include "zoo/portfolio.hpp"
#include "zoo/predictors.hpp"
#include "zoo/regression.hpp"
#include "zoo/synthetic.hpp"

namespace py = pybind11;
using namespace zoo;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Date> parse_dates(const std::vector<std::string>& text) {
  std::vector<Date> out;
  out.reserve(text.size());
  for (const auto& t : text) out.push_back(Date::parse(t));
  return out;
}

std::vector<std::string> iso_dates(const std::vector<Date>& dates) {
  std::vector<std::string> out;
  out.reserve(dates.size());
  for (const auto& d : dates) out.push_back(d.iso());
  return out;
}

Panel make_panel(const std::vector<std::string>& dates, const std::vector<std::string>& stocks, const Array& values) {
  if (values.ndim() != 2) throw ConfigError("panel values must be a 2-d array");
  if (static_cast<std::size_t>(values.shape(0)) != dates.size() ||
      static_cast<std::size_t>(values.shape(1)) != stocks.size()) {
    throw ConfigError("panel values must have shape (len(dates), len(stocks))");
  }
  std::vector<double> v(values.data(), values.data() + values.size());
  return Panel(parse_dates(dates), stocks, std::move(v));
}

Array panel_values(const Panel& p) {
  Array out({p.n_dates(), p.n_stocks()});
  std::copy(p.values().begin(), p.values().end(), out.mutable_data());
  return out;
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) { return std::vector<double>(a.data(), a.data() + a.size()); }

PnLSeries make_pnl(const std::vector<std::string>& dates, const Array& values) {
  PnLSeries p{parse_dates(dates), to_vector(values), false};
  if (p.dates.size() != p.returns.size()) throw ConfigError("dates and values differ in length");
  return p;
}

DatedSeries make_series(const std::vector<std::string>& dates, const Array& values) {
  DatedSeries s{parse_dates(dates), to_vector(values)};
  if (s.dates.size() != s.values.size()) throw ConfigError("dates and values differ in length");
  return s;
}

py::dict pnl_dict(const PnLSeries& p) {
  py::dict d;
  d["dates"] = iso_dates(p.dates);
  d["returns"] = to_array(p.returns);
  d["hedged"] = p.hedged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Factor zoo toolkit: backtests, Sharpe-ratio adjustments and discount-ratio diagnostics";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

  py::class_<Panel>(m, "Panel")
      .def(py::init(&make_panel), py::arg("dates"), py::arg("stocks"), py::arg("values"))
      .def_property_readonly("dates", [](const Panel& p) { return iso_dates(p.dates()); })
      .def_property_readonly("stocks", [](const Panel& p) { return p.stocks(); })
      .def_property_readonly("values", &panel_values)
      .def_property_readonly("shape", [](const Panel& p) { return py::make_tuple(p.n_dates(), p.n_stocks()); })
      .def("__repr__", [](const Panel& p) {
        return "<Panel " + std::to_string(p.n_dates()) + " dates x " + std::to_string(p.n_stocks()) + " stocks>";
      });

  m.def("load_panel", [](const std::filesystem::path& path) { return load_panel(path); }, py::arg("path"));
  m.def("save_panel", [](const Panel& p, const std::filesystem::path& path) { save_panel(p, path); }, py::arg("panel"),
        py::arg("path"));

  m.def(
      "generate_market",
      [](std::size_t n_stocks, std::size_t n_months, double b, double sigma_eta, double sigma_eps, double market_vol,
         std::uint64_t seed) {
        MarketModelParams p;
        p.n_stocks = n_stocks;
        p.n_months = n_months;
        p.b = b;
        p.sigma_eta = sigma_eta;
        p.sigma_eps = sigma_eps;
        p.market_vol = market_vol;
        p.seed = seed;
        auto mk = generate_market(p);
        py::dict d;
        d["returns"] = mk.returns;
        d["signal"] = mk.signal;
        d["market_dates"] = iso_dates(mk.market_returns.dates);
        d["market"] = to_array(mk.market_returns.values);
        d["betas"] = to_array(mk.betas);
        d["analytic_sharpe_monthly"] = analytic_sharpe(p);
        return d;
      },
      py::arg("n_stocks") = 500, py::arg("n_months") = 600, py::arg("b") = 0.01, py::arg("sigma_eta") = 0.0,
      py::arg("sigma_eps") = 0.1, py::arg("market_vol") = 0.04, py::arg("seed") = 1,
      "One-signal synthetic market with ranked signals in [-0.5, 0.5].");

  m.def("quantile_weights", [](const Panel& signal, double q) { return quantile_weights(signal, q).panel(); },
        py::arg("signal"), py::arg("q") = 0.10, "Equal-weighted top/bottom-q long-short weights.");
  m.def("rank_weights", [](const Panel& signal) { return rank_weights(signal).panel(); }, py::arg("signal"));

  m.def("compute_pnl", [](const Panel& weights, const Panel& returns) {
        return pnl_dict(compute_pnl(WeightMatrix(weights), returns));
      }, py::arg("weights"), py::arg("returns"), "Monthly PnL dated by the return month.");
  m.def(
      "beta_hedge",
      [](const std::vector<std::string>& dates, const Array& pnl, const std::vector<std::string>& market_dates,
         const Array& market, int window) {
        return pnl_dict(beta_hedge(make_pnl(dates, pnl), make_series(market_dates, market), window));
      },
      py::arg("dates"), py::arg("pnl"), py::arg("market_dates"), py::arg("market"), py::arg("window") = 36);
  m.def(
      "realized_beta",
      [](const std::vector<std::string>& dates, const Array& pnl, const std::vector<std::string>& market_dates,
         const Array& market) { return realized_beta(make_pnl(dates, pnl), make_series(market_dates, market)); },
      py::arg("dates"), py::arg("pnl"), py::arg("market_dates"), py::arg("market"));
  m.def("holding_period", [](const Panel& weights) { return holding_period(WeightMatrix(weights)); },
        py::arg("weights"));

  m.def(
      "sharpe",
      [](const Array& monthly) {
        std::vector<Date> dates;
        for (py::ssize_t i = 0; i < monthly.size(); ++i) dates.push_back(Date::month_end(static_cast<std::int64_t>(i)));
        const auto r = sharpe(PnLSeries{dates, to_vector(monthly), false});
        return py::make_tuple(r.sr_annual, r.t_stat);
      },
      py::arg("monthly_returns"), "Annualized Sharpe ratio and t-statistic of monthly returns.");
  m.def("discount_ratio", &discount_ratio, py::arg("sr_oos"), py::arg("sr_is"));
  m.def("size_adjust_simple", &size_adjust_simple, py::arg("sr_pool"), py::arg("n_pool"), py::arg("n_ref"));
  m.def(
      "size_adjust_two_step",
      [](const Panel& signal, const Panel& returns, double q, std::size_t draws_per_n, std::uint64_t seed) {
        const StrategyContext ctx(signal, returns);
        TwoStepOptions o;
        o.draws_per_n = draws_per_n;
        o.seed = seed;
        const auto r = size_adjust_two_step(ctx, q, o);
        py::dict d;
        d["raw"] = r.raw;
        d["intercept"] = r.two_step_intercept;
        d["slope"] = r.two_step_slope;
        d["n_grid"] = r.n_grid;
        d["sr_by_n"] = to_array(r.sr_by_n);
        return d;
      },
      py::arg("signal"), py::arg("returns"), py::arg("q") = 0.10, py::arg("draws_per_n") = 50, py::arg("seed") = 1,
      "Sharpe extrapolated to an infinite cross-section by regressing subsample Sharpe on 1/n.");

  m.def(
      "diff_sharpe_drop_data",
      [](const Panel& weights, const Panel& returns, double drop_frac, bool by_absolute_value) {
        return diff_sharpe_drop_data(WeightMatrix(weights), returns, DropDataOptions{drop_frac, by_absolute_value});
      },
      py::arg("weights"), py::arg("returns"), py::arg("drop_frac") = 0.001, py::arg("by_absolute_value") = false);

  m.def(
      "overfit_experiment",
      [](std::size_t n_stocks, std::size_t n_months, double b, double sigma_eps, std::size_t k_signals, double split,
         std::uint64_t seed) {
        MarketModelParams p;
        p.n_stocks = n_stocks;
        p.n_months = n_months;
        p.b = b;
        p.sigma_eps = sigma_eps;
        p.seed = seed;
        const auto o = overfit_experiment(p, k_signals, split);
        py::dict d;
        d["sr_is"] = o.sr_is;
        d["sr_oos"] = o.sr_oos;
        d["discount"] = o.discount;
        d["selected"] = o.selected;
        return d;
      },
      py::arg("n_stocks") = 100, py::arg("n_months") = 240, py::arg("b") = 0.0, py::arg("sigma_eps") = 0.1,
      py::arg("k_signals") = 100, py::arg("split") = 0.5, py::arg("seed") = 1,
      "Best-of-K signal selection in-sample, reported with its held-out Sharpe.");

  m.def(
      "ols",
      [](const Array& y, const std::vector<std::string>& names, const Array& x, bool intercept, bool robust) {
        if (x.ndim() != 2 || static_cast<std::size_t>(x.shape(1)) != names.size() || x.shape(0) != y.size()) {
          throw ConfigError("x must have shape (len(y), len(names))");
        }
        std::vector<Regressor> regs;
        for (std::size_t j = 0; j < names.size(); ++j) {
          Regressor r{names[j], std::vector<double>(static_cast<std::size_t>(y.size()))};
          for (py::ssize_t i = 0; i < y.size(); ++i) r.values[static_cast<std::size_t>(i)] = x.at(i, j);
          regs.push_back(std::move(r));
        }
        const auto yv = to_vector(y);
        const auto fit = ols(yv, regs, OlsOptions{intercept, robust});
        py::dict d;
        d["names"] = fit.names;
        d["coefficients"] = to_array(fit.coefficients);
        d["std_errors"] = to_array(fit.std_errors);
        d["t_stats"] = to_array(fit.t_stats);
        d["r_squared"] = fit.r_squared;
        d["n_obs"] = fit.n_obs;
        return d;
      },
      py::arg("y"), py::arg("names"), py::arg("x"), py::arg("intercept") = true, py::arg("robust") = false,
      "Least squares; rows with a non-finite value are dropped. The constant is reported last.");

  m.def(
      "run_pipeline",
      [](const std::map<std::string, std::string>& settings, const std::filesystem::path& output_dir) {
        auto config = default_config();
        for (const auto& [k, v] : settings) apply_setting(config, k, v);
        config.output_dir = output_dir;
        const auto s = run_pipeline(config);
        py::dict d;
        d["n_factors"] = s.n_factors;
        d["n_included"] = s.n_included;
        d["output_dir"] = s.output_dir;
        return d;
      },
      py::arg("settings"), py::arg("output_dir"),
      "Full analysis into an output bundle. Settings use the same keys as the configuration file.");
}
