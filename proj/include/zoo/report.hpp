#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zoo/metrics.hpp"
#include "zoo/predictors.hpp"
#include "zoo/regression.hpp"

namespace zoo {

// One row of metrics.csv.
struct MetricsRow {
  std::string name;
  double sr_is = 0.0;
  double sr_oos = 0.0;
  double t_is = 0.0;
  double discount = 0.0;
  double sr_simple_adj = 0.0;
  double sr_two_step = 0.0;
};

inline constexpr const char* kMetricsHeader = "name,sr_is,sr_oos,t_is,discount,sr_simple_adj,sr_two_step";

void write_metrics(std::span<const MetricsRow> rows, const std::filesystem::path& path);
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

// `factor,<variable>,...`
void write_covariates(const CovariateTable& table, const std::filesystem::path& path);
CovariateTable read_covariates(const std::filesystem::path& path, bool standardized);

// Mean / median / quartiles / count per covariate.
void write_summary(std::span<const SummaryRow> rows, const std::filesystem::path& path);

// Coefficients with t-stats in parentheses underneath, then N and R2 rows;
// one column per regression.
void write_regression_table(std::span<const OlsResult> results, const std::filesystem::path& path);
void write_correlation(const NamedMatrix& matrix, const std::filesystem::path& path);
void write_event_study(std::span<const EventPoint> curve, const std::filesystem::path& path);

// Space-separated two-column plot data with an `x y` header.
void write_plot_data(const std::filesystem::path& path, std::span<const std::pair<std::string, std::string>> points);

}  // namespace zoo
