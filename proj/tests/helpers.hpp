#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "zoo/date.hpp"
#include "zoo/panel.hpp"

namespace testing {

inline std::vector<zoo::Date> monthly_dates(std::size_t n, zoo::Date start = zoo::Date(2000, 1, 31)) {
  std::vector<zoo::Date> d;
  for (std::size_t i = 0; i < n; ++i) d.push_back(zoo::Date::month_end(start.month_index() + static_cast<long>(i)));
  return d;
}

inline std::vector<std::string> stock_ids(std::size_t n) {
  std::vector<std::string> ids;
  char buf[16];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "S%04zu", i);
    ids.emplace_back(buf);
  }
  return ids;
}

inline zoo::Panel random_panel(std::mt19937_64& rng, std::size_t t, std::size_t n, double missing_share = 0.0,
                               double sd = 0.05) {
  std::normal_distribution<double> z(0.0, sd);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(t * n);
  for (auto& x : v) x = u(rng) < missing_share ? zoo::kMissing : z(rng);
  return zoo::Panel(monthly_dates(t), stock_ids(n), std::move(v));
}

inline bool same_bits(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

// --- independent oracles ---

inline double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double sample_sd(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

// Solves A x = b by Gauss-Jordan elimination with partial pivoting and also
// returns A^{-1}.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b,
                                       std::vector<std::vector<double>>* inverse = nullptr) {
  const std::size_t n = b.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    std::swap(inv[c], inv[p]);
    const double d = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    b[c] /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
      b[r] -= f * b[c];
    }
  }
  if (inverse) *inverse = inv;
  return b;
}

struct NormalEquationsFit {
  std::vector<double> coef;  // regressor order, intercept last
  std::vector<double> se;
  double r2 = 0.0;
};

// Classical OLS with an intercept from (X'X) b = X'y.
inline NormalEquationsFit normal_equations(const std::vector<std::vector<double>>& columns, const std::vector<double>& y) {
  const std::size_t n = y.size();
  const std::size_t k = columns.size() + 1;
  auto x = [&](std::size_t i, std::size_t j) { return j < columns.size() ? columns[j][i] : 1.0; };
  std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      xty[a] += x(i, a) * y[i];
      for (std::size_t b = 0; b < k; ++b) xtx[a][b] += x(i, a) * x(i, b);
    }
  }
  std::vector<std::vector<double>> inv;
  NormalEquationsFit fit;
  fit.coef = gauss_solve(xtx, xty, &inv);
  double ssr = 0.0, sst = 0.0;
  const double ybar = mean(y);
  for (std::size_t i = 0; i < n; ++i) {
    double fitted = 0.0;
    for (std::size_t a = 0; a < k; ++a) fitted += x(i, a) * fit.coef[a];
    ssr += (y[i] - fitted) * (y[i] - fitted);
    sst += (y[i] - ybar) * (y[i] - ybar);
  }
  const double s2 = ssr / static_cast<double>(n - k);
  for (std::size_t a = 0; a < k; ++a) fit.se.push_back(std::sqrt(s2 * inv[a][a]));
  fit.r2 = 1.0 - ssr / sst;
  return fit;
}

}  // namespace testing
