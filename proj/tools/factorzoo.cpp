// factorzoo: command-line front end for the factor-zoo analysis.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "zoo/config.hpp"
#include "zoo/errors.hpp"
#include "zoo/pipeline.hpp"
#include "zoo/portfolio.hpp"
#include "zoo/synthetic.hpp"

namespace fs = std::filesystem;
using namespace zoo;

namespace {

void info(const std::string& message) { std::cerr << "factorzoo: " << message << '\n'; }

// Shared --config / --set / --out handling for the analysis subcommands.
struct RunOptions {
  std::string config_file;
  std::vector<std::string> settings;
  std::string out;
  std::string seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "key=value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--set", settings, "override one setting, key=value (repeatable)");
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--seed", seed, "random seed");
  }

  RunConfig build() const {
    RunConfig config = default_config();
    if (!config_file.empty()) apply_config_file(config, config_file);
    for (const auto& s : settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!seed.empty()) apply_setting(config, "seed", seed);
    if (!out.empty()) config.output_dir = out;
    config.validate();
    return config;
  }
};

std::vector<FactorMeasurement> measure_and_filter(const Dataset& data, const RunConfig& config, bool two_step) {
  info("measuring " + std::to_string(data.factors.size()) + " factors");
  auto m = measure_factors(data, config, two_step);
  apply_filter(m, config.sr_threshold);
  std::size_t n = 0;
  for (const auto& x : m) n += x.included ? 1 : 0;
  info(std::to_string(n) + " factors pass the in-sample Sharpe threshold");
  return m;
}

int run_simulate(const std::string& model, const std::string& out, const MarketModelParams& market,
                 const RunOptions& options) {
  fs::create_directories(out);
  if (model == "market") {
    market.validate();
    const auto sim = generate_market(market);
    save_panel(sim.returns, fs::path(out) / "returns.csv");
    save_panel(sim.signal, fs::path(out) / "signal.csv");
    save_series(sim.market_returns, fs::path(out) / "market.csv", "market");
    std::printf("analytic_monthly_sharpe=%.6f\n", analytic_sharpe(market));
  } else {
    const RunConfig config = options.build();
    save_dataset(make_synthetic_dataset(config.synthetic), out);
    info("wrote " + (fs::path(out) / "dataset.cfg").string());
  }
  return 0;
}

struct BacktestArgs {
  std::string signal, returns, market, out, weights_out;
  double q = 0.10;
  int hedge_window = 36;
  int embargo = 0;
  bool rank = false;
};

int run_backtest(const BacktestArgs& a) {
  std::vector<Panel> panels{load_panel(a.returns, PanelKind::returns), load_panel(a.signal, PanelKind::signal)};
  auto aligned = align(panels);
  const Panel signal = a.embargo > 0 ? embargo_shift(aligned[1], a.embargo) : aligned[1];
  std::optional<DatedSeries> market;
  if (!a.market.empty()) market = load_series(a.market);
  const WeightMatrix w = a.rank ? rank_weights(signal) : quantile_weights(signal, a.q);
  const StrategyContext ctx(signal, aligned[0], market ? &*market : nullptr, a.hedge_window);
  const PnLSeries pnl = ctx.pnl(w, aligned[0]);
  const auto report = sharpe(pnl);
  std::printf("sr_annual=%.6f\nt_stat=%.6f\nn_months=%zu\nholding_period=%.6f\n", report.sr_annual,
              report.t_stat, report.n_months, holding_period(w));
  if (!a.weights_out.empty()) {
    save_panel(w.panel(), a.weights_out);
    info("wrote " + a.weights_out);
  }
  if (!a.out.empty()) {
    save_series(DatedSeries{pnl.dates, pnl.returns}, a.out, "pnl");
    info("wrote " + a.out);
  }
  return 0;
}

int run_measure(const RunOptions& options) {
  const auto config = options.build();
  const auto dir = config.output_dir;
  fs::create_directories(dir);
  const auto data = load_dataset(config);
  const auto m = measure_and_filter(data, config, true);
  write_measurements(m, dir);
  write_publication(data, m, dir);
  write_pool_outputs(measure_pools(data, m, config), dir);
  info("wrote " + (dir / "metrics.csv").string());
  return 0;
}

int run_diagnose(const RunOptions& options) {
  const auto config = options.build();
  const auto dir = config.output_dir;
  fs::create_directories(dir);
  const auto data = load_dataset(config);
  const auto m = measure_and_filter(data, config, false);
  write_measurements(m, dir);
  write_publication(data, m, dir);
  const auto raw = compute_covariates(data, m, config);
  write_covariate_outputs(raw, standardize_available(raw), config, dir);
  info("wrote " + (dir / "covariates_standardized.csv").string());
  return 0;
}

int run_regress(const RunOptions& options, const std::string& bundle) {
  const auto config = options.build();
  const fs::path in = bundle.empty() ? config.output_dir : fs::path(bundle);
  const auto contents = read_bundle(in);
  const auto table = read_covariates(in / "covariates_standardized.csv", true);
  std::vector<double> discounts, years;
  for (const auto& name : table.factors) {
    std::size_t i = 0;
    while (i < contents.measurements.size() && contents.measurements[i].name != name) ++i;
    if (i == contents.measurements.size()) throw DataError("no metrics for factor " + name);
    discounts.push_back(contents.measurements[i].discount);
    years.push_back(contents.data.factors[i].publication_date.fractional_year());
  }
  const fs::path dir = options.out.empty() ? in : fs::path(options.out);
  fs::create_directories(dir);
  write_regression_outputs(run_regressions(table, discounts, years, config), dir);
  info("wrote " + (dir / "horse_race.csv").string());
  return 0;
}

int run_report(const RunOptions& options, const std::string& bundle) {
  const auto config = options.build();
  const fs::path in = bundle.empty() ? config.output_dir : fs::path(bundle);
  const auto contents = read_bundle(in);
  const fs::path dir = options.out.empty() ? in : fs::path(options.out);
  fs::create_directories(dir);
  write_figures(contents.data, contents.measurements, config, dir);
  info("wrote figure data to " + dir.string());
  return 0;
}

int run_all(const RunOptions& options) {
  const auto config = options.build();
  const auto summary = run_pipeline(config);
  info(std::to_string(summary.n_included) + " of " + std::to_string(summary.n_factors) +
       " factors analyzed; bundle in " + summary.output_dir.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor-zoo replication: strategy backtests, post-publication decay and its predictors"};
  app.require_subcommand(1);

  std::string model = "zoo";
  std::string sim_out = "data";
  MarketModelParams market;
  RunOptions sim_options;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic data set");
  simulate->add_option("--model", model, "market (one signal) or zoo (many factors)")
      ->check(CLI::IsMember({"market", "zoo"}));
  simulate->add_option("--out", sim_out, "output directory");
  simulate->add_option("--stocks", market.n_stocks, "market model: number of stocks");
  simulate->add_option("--months", market.n_months, "market model: number of months");
  simulate->add_option("--b", market.b, "market model: mean signal payoff");
  simulate->add_option("--sigma-eta", market.sigma_eta, "market model: payoff volatility");
  simulate->add_option("--sigma-eps", market.sigma_eps, "market model: idiosyncratic volatility");
  simulate->add_option("--seed", market.seed, "market model: random seed");
  simulate->add_option("--config", sim_options.config_file, "zoo model: configuration file")
      ->check(CLI::ExistingFile);
  simulate->add_option("--set", sim_options.settings, "zoo model: override one setting, key=value");

  BacktestArgs bt;
  auto* backtest = app.add_subcommand("backtest", "backtest one signal");
  backtest->add_option("--signal", bt.signal, "signal panel CSV")->required()->check(CLI::ExistingFile);
  backtest->add_option("--returns", bt.returns, "returns panel CSV")->required()->check(CLI::ExistingFile);
  backtest->add_option("--market", bt.market, "market return series CSV; enables the beta hedge")
      ->check(CLI::ExistingFile);
  backtest->add_option("--q", bt.q, "quantile per leg");
  backtest->add_option("--hedge-window", bt.hedge_window, "months in the rolling beta estimate");
  backtest->add_option("--embargo", bt.embargo, "months to delay the signal");
  backtest->add_flag("--rank", bt.rank, "rank-proportional weights instead of quantile legs");
  backtest->add_option("--out", bt.out, "write the PnL series here");
  backtest->add_option("--weights-out", bt.weights_out, "write the weight panel here");

  RunOptions measure_opts, diagnose_opts, regress_opts, report_opts, run_opts;
  std::string regress_bundle, report_bundle;
  auto* measure = app.add_subcommand("measure", "Sharpe ratios, discount ratios and size adjustments");
  measure_opts.attach(measure);
  auto* diagnose = app.add_subcommand("diagnose", "arbitrage and overfitting covariates");
  diagnose_opts.attach(diagnose);
  auto* regress = app.add_subcommand("regress", "regress discount ratios on the covariates of a bundle");
  regress_opts.attach(regress);
  regress->add_option("--bundle", regress_bundle, "bundle produced by diagnose or run");
  auto* report = app.add_subcommand("report", "event study and figure data from a bundle");
  report_opts.attach(report);
  report->add_option("--bundle", report_bundle, "bundle produced by measure or run");
  auto* run = app.add_subcommand("run", "full analysis into one output bundle");
  run_opts.attach(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return run_simulate(model, sim_out, market, sim_options);
    if (*backtest) return run_backtest(bt);
    if (*measure) return run_measure(measure_opts);
    if (*diagnose) return run_diagnose(diagnose_opts);
    if (*regress) return run_regress(regress_opts, regress_bundle);
    if (*report) return run_report(report_opts, report_bundle);
    if (*run) return run_all(run_opts);
  } catch (const ConfigError& e) {
    std::cerr << "factorzoo: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "factorzoo: data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "factorzoo: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
