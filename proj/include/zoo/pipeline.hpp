#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zoo/config.hpp"
#include "zoo/factor_spec.hpp"
#include "zoo/metrics.hpp"
#include "zoo/predictors.hpp"
#include "zoo/regression.hpp"
#include "zoo/report.hpp"

namespace zoo {

// Everything a run reads, on one date/stock grid, factors sorted by name.
struct Dataset {
  Panel returns;
  std::optional<Panel> volume;
  std::optional<Panel> marketcap;
  std::optional<DatedSeries> market;
  std::vector<FactorSpec> factors;
  std::vector<PoolSpec> pools;
};

// Loads the configured files, aligns every panel jointly and applies the
// signal embargo. With no returns path, generates the synthetic zoo.
Dataset load_dataset(const RunConfig& config);

// Synthetic zoo plus a large-cap pool holding the top 40% of stocks by
// market cap each month.
Dataset make_synthetic_dataset(const ZooParams& params);

// Writes the dataset as CSV files with a config file that loads them back.
void save_dataset(const Dataset& data, const std::filesystem::path& dir);

struct FactorMeasurement {
  std::string name;
  SharpeReport is;
  std::optional<SharpeReport> oos;  // months strictly after publication
  double discount = kMissing;
  double n_is = 0.0;   // average stocks with a signal, in-sample
  double n_oos = 0.0;  // same after publication
  double sr_simple_adj = kMissing;
  double sr_two_step = kMissing;     // out-of-sample intercept
  double sr_two_step_is = kMissing;  // in-sample intercept
  PnLSeries pnl;
  bool included = false;
  std::string exclusion_reason;

  MetricsRow metrics_row() const;
};

// Strategy PnL, in-sample and post-publication Sharpe ratios and the size
// adjustments for every factor. Factors whose Sharpe ratios cannot be
// measured come back excluded with a reason.
std::vector<FactorMeasurement> measure_factors(const Dataset& data, const RunConfig& config, bool with_two_step);

// Indices with sr_is >= threshold in `included`, the rest in `excluded`.
struct FilterResult {
  std::vector<std::size_t> included;
  std::vector<std::size_t> excluded;
};
FilterResult filter_factors(std::span<const SharpeReport> reports, double threshold);

// Applies the threshold to measurable factors and fills in exclusion reasons.
void apply_filter(std::vector<FactorMeasurement>& measurements, double threshold);

// Raw covariates for the included factors. A covariate that cannot be
// computed for a factor is left missing and reported on stderr.
CovariateTable compute_covariates(const Dataset& data, std::span<const FactorMeasurement> measurements,
                                  const RunConfig& config);

// Standardizes the columns that have at least two distinct finite values;
// the others become missing with a warning.
CovariateTable standardize_available(const CovariateTable& raw);

struct RegressionOutputs {
  std::vector<std::string> arb_vars;
  std::vector<std::string> overfit_vars;
  std::vector<OlsResult> arbitrage;    // one regression per usable arbitrage covariate
  std::vector<OlsResult> overfitting;  // overfitting covariates and the publication date
  std::optional<NamedMatrix> corr_arbitrage;
  std::optional<NamedMatrix> corr_overfitting;
  VulnerabilityScores scores;
  std::vector<OlsResult> horse_race;
};

// Cross-sectional analysis of the discount ratios. `discounts` and
// `publication_year` follow the factor order of `standardized`.
RegressionOutputs run_regressions(const CovariateTable& standardized, std::span<const double> discounts,
                                  std::span<const double> publication_year, const RunConfig& config);

struct PoolMeasurement {
  std::string pool;
  std::string factor;
  double n_pool = 0.0;
  double n_ref = 0.0;
  double sr_is = kMissing;
  double sr_pool = kMissing;
  double raw = kMissing;      // sr_pool / sr_is
  double simple = kMissing;   // size-adjusted sr_pool / sr_is
  double complex = kMissing;  // two-step intercept ratio
};

std::vector<PoolMeasurement> measure_pools(const Dataset& data, std::span<const FactorMeasurement> measurements,
                                           const RunConfig& config);

// Bundle writers used by the CLI subcommands.
void write_measurements(std::span<const FactorMeasurement> measurements, const std::filesystem::path& dir);
void write_covariate_outputs(const CovariateTable& raw, const CovariateTable& standardized, const RunConfig& config,
                             const std::filesystem::path& dir);
void write_regression_outputs(const RegressionOutputs& outputs, const std::filesystem::path& dir);
void write_pool_outputs(std::span<const PoolMeasurement> pools, const std::filesystem::path& dir);
void write_figures(const Dataset& data, std::span<const FactorMeasurement> measurements, const RunConfig& config,
                   const std::filesystem::path& dir);

// `name,publication_date,n_fields,n_operations` for the included factors.
void write_publication(const Dataset& data, std::span<const FactorMeasurement> measurements,
                       const std::filesystem::path& dir);

// Included factors of an existing bundle, rebuilt from metrics.csv, pnl.csv
// and publication.csv. Signals and in-sample windows are not restored.
struct BundleContents {
  Dataset data;
  std::vector<FactorMeasurement> measurements;
};
BundleContents read_bundle(const std::filesystem::path& dir);

struct PipelineSummary {
  std::size_t n_factors = 0;
  std::size_t n_included = 0;
  std::filesystem::path output_dir;
};

// Full run: measure, filter, covariates, regressions, pools, event study and
// figures, written to config.output_dir.
PipelineSummary run_pipeline(const RunConfig& config);

}  // namespace zoo
