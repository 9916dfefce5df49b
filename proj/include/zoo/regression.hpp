#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "zoo/predictors.hpp"

namespace zoo {

inline constexpr const char* kConstantName = "const";

struct Regressor {
  std::string name;
  std::vector<double> values;
};

struct OlsResult {
  std::vector<std::string> names;  // kConstantName last when an intercept is fitted
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  double r_squared = 0.0;
  std::size_t n_obs = 0;
  std::vector<double> residuals;
  std::vector<std::size_t> rows_used;  // observations kept after listwise deletion

  double coefficient(const std::string& name) const;
  double t_stat(const std::string& name) const;
};

struct OlsOptions {
  bool intercept = true;
  // White/HC1 standard errors instead of the classical ones.
  bool robust = false;
};

// Least squares via Householder QR. Rows with a non-finite value in y or any
// regressor are dropped. Throws DataError on a rank-deficient design or when
// n_obs <= n_regressors + 1.
OlsResult ols(std::span<const double> y, std::span<const Regressor> x, const OlsOptions& options = {});

struct NamedMatrix {
  std::vector<std::string> names;
  std::vector<double> values;  // row-major, names.size() squared

  double operator()(std::size_t i, std::size_t j) const { return values[i * names.size() + j]; }
};

// Pairwise-complete Pearson correlations of the selected columns.
NamedMatrix correlation_matrix(const CovariateTable& table, std::span<const std::string> variables);
NamedMatrix correlation_matrix(const CovariateTable& table);

// One regression of the discount ratio on each listed covariate plus a constant.
std::vector<OlsResult> univariate_battery(std::span<const double> discounts, const CovariateTable& table,
                                          std::span<const std::string> variables, const OlsOptions& options = {});

inline constexpr const char* kYearRegressor = "year_minus_1990";
inline constexpr const char* kArbitrageRegressor = "arbitrage_vulnerability";
inline constexpr const char* kOverfittingRegressor = "overfitting_vulnerability";

// The five horse-race specifications: (1) year, (2) arbitrage,
// (3) overfitting, (4) all three, (5) year and overfitting.
// `publication_year` is the calendar year; 1990 is subtracted here.
std::vector<OlsResult> horse_race(std::span<const double> discounts, const VulnerabilityScores& scores,
                                  std::span<const double> publication_year, const OlsOptions& options = {});

}  // namespace zoo
