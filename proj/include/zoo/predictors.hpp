#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zoo/factor_spec.hpp"
#include "zoo/metrics.hpp"
#include "zoo/portfolio.hpp"

namespace zoo {

// Covariate column names. Every covariate is oriented so that a larger value
// is expected to come with a lower discount ratio.
namespace var {
inline constexpr const char* kLogHoldingPeriod = "log_holding_period";
inline constexpr const char* kLogMktcapLongShort = "log_mktcap_long_short";
inline constexpr const char* kLogMktcapShort = "log_mktcap_short";
inline constexpr const char* kLiquidity = "liquidity";
inline constexpr const char* kDummyTstat = "dummy_tstat";
inline constexpr const char* kLogQSpan = "log_q_span";
inline constexpr const char* kDiffBestQ = "diff_best_q";
inline constexpr const char* kDummyFields = "dummy_nb_fields";
inline constexpr const char* kDummyOperations = "dummy_nb_operations";
inline constexpr const char* kSqrtMonthsIs = "sqrt_months_is";
inline constexpr const char* kLogStdSubset = "log_std_subset";
inline constexpr const char* kDiffDropData = "diff_drop_data";
inline constexpr const char* kPublished = "dapublished";
}  // namespace var

std::vector<std::string> arbitrage_variables();
std::vector<std::string> overfitting_variables();

// Factor x variable matrix, factor-major. Missing cells hold kMissing.
struct CovariateTable {
  std::vector<std::string> factors;
  std::vector<std::string> variables;
  std::vector<double> values;
  bool standardized = false;

  CovariateTable() = default;
  CovariateTable(std::vector<std::string> factor_names, std::vector<std::string> variable_names);

  double operator()(std::size_t f, std::size_t v) const { return values[f * variables.size() + v]; }
  double& operator()(std::size_t f, std::size_t v) { return values[f * variables.size() + v]; }
  std::optional<std::size_t> variable_index(const std::string& name) const;
  std::vector<double> column(std::size_t v) const;
  std::vector<double> column(const std::string& name) const;
};

struct VulnerabilityScores {
  std::vector<std::string> factors;
  std::vector<double> arbitrage;
  std::vector<double> overfitting;
};

// --- arbitrage covariates ---

// ln of the cross-sectional median holding period.
double holding_period_var(const WeightMatrix& weights);

// Time-series median of the leg-weighted liquidity -|r|/V relative to the
// pool average, using same-month returns and volumes.
double amihud_liquidity_var(const WeightMatrix& weights, const Panel& returns, const Panel& volume);

enum class CapLeg { both, short_only };
// ln of the time-series median of the leg-weighted market cap relative to
// the pool average. `both` averages the two legs; `short_only` uses the short leg.
double mktcap_ratio_var(const WeightMatrix& weights, const Panel& marketcap, CapLeg leg);

// --- overfitting covariates ---

// 1 when the in-sample t-stat is below 3.
int dummy_tstat(const SharpeReport& report);

std::map<double, double> sharpe_by_quantile(const StrategyContext& ctx, std::span<const double> q_set);
// ln(population sd of the Sharpe ratios / sr_is); -infinity when they are all equal.
double log_quantile_span(std::span<const double> sr_by_q, double sr_is);
double log_quantile_span(const StrategyContext& ctx, std::span<const double> q_set, double sr_is);
double deviation_from_best_q(const std::map<double, double>& sr_by_q, double sr_baseline);

int dummy_fields(const FactorSpec& spec);
int dummy_operations(const FactorSpec& spec);
// -sqrt(number of in-sample months).
double months_in_sample_var(const FactorSpec& spec);

struct SubsetOptions {
  double drop_frac = 0.10;
  std::size_t n_draws = 100;
  std::uint64_t seed = 1;
  // Redraw the dropped stocks every month; otherwise one set per draw.
  bool per_date = true;
};
// ln of the sample sd of Sharpe ratios across random stock-dropping draws.
double log_subset_std(const StrategyContext& ctx, double q, const SubsetOptions& options = {});

struct DropDataOptions {
  double drop_frac = 0.001;
  // Rank contributions by absolute value instead of signed value.
  bool by_absolute_value = false;
};
// Sharpe with all stock-month contributions minus Sharpe after removing the
// top drop_frac of them.
double diff_sharpe_drop_data(const WeightMatrix& weights, const Panel& returns, const DropDataOptions& options = {});

// Unix seconds at midnight UTC of the publication date.
double publication_date_var(const Date& publication_date);
inline double publication_date_var(const FactorSpec& spec) { return publication_date_var(spec.publication_date); }

// --- aggregation ---

// Column-wise (x - mean) / sample sd over finite cells; non-finite cells
// (e.g. a -infinity log span) become missing.
CovariateTable standardize(const CovariateTable& table);

VulnerabilityScores vulnerability_scores(const CovariateTable& table, std::span<const std::string> arb_vars,
                                         std::span<const std::string> overfit_vars);

struct SummaryRow {
  std::string variable;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  std::size_t n = 0;
};
std::vector<SummaryRow> summarize(const CovariateTable& table, std::span<const std::string> variables);

}  // namespace zoo
