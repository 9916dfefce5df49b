#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace zoo::stats {

double mean(std::span<const double> x);
// Sample (n-1) standard deviation.
double sample_sd(std::span<const double> x);
// Population (n) standard deviation.
double population_sd(std::span<const double> x);
double median(std::vector<double> x);
// Linear-interpolation quantile (Hyndman-Fan type 7), p in [0, 1].
double quantile(std::vector<double> x, double p);
// Annualized Sharpe of monthly returns: mean / sample sd * sqrt(12).
// Returns NaN when fewer than two points or zero dispersion.
double annualized_sharpe(std::span<const double> monthly);
// Slope of the least-squares line y = a + b x. NaN when x has no spread.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace zoo::stats
