#include "zoo/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zoo/errors.hpp"
#include "zoo/stats.hpp"

namespace zoo {

namespace {

double lookup(const std::vector<std::string>& names, const std::vector<double>& values, const std::string& name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("regression has no term '" + name + "'");
  return values[static_cast<std::size_t>(it - names.begin())];
}

}  // namespace

double OlsResult::coefficient(const std::string& name) const { return lookup(names, coefficients, name); }
double OlsResult::t_stat(const std::string& name) const { return lookup(names, t_stats, name); }

OlsResult ols(std::span<const double> y, std::span<const Regressor> x, const OlsOptions& options) {
  for (const auto& r : x) {
    if (r.values.size() != y.size()) throw ConfigError("regressor '" + r.name + "' has the wrong length");
  }
  OlsResult out;
  for (std::size_t i = 0; i < y.size(); ++i) {
    bool ok = std::isfinite(y[i]);
    for (const auto& r : x) ok = ok && std::isfinite(r.values[i]);
    if (ok) out.rows_used.push_back(i);
  }
  const std::size_t n = out.rows_used.size();
  const std::size_t k = x.size();
  const std::size_t p = k + (options.intercept ? 1 : 0);
  if (p == 0) throw ConfigError("regression needs at least one term");
  if (n <= k + 1) {
    throw DataError("regression has " + std::to_string(n) + " complete rows for " + std::to_string(k) +
                    " regressors");
  }

  for (const auto& r : x) out.names.push_back(r.name);
  if (options.intercept) out.names.push_back(kConstantName);

  // Column-major design matrix and response.
  std::vector<double> a(n * p);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = out.rows_used[i];
    for (std::size_t j = 0; j < k; ++j) a[j * n + i] = x[j].values[row];
    if (options.intercept) a[k * n + i] = 1.0;
    b[i] = y[row];
  }
  const std::vector<double> design = a;
  auto col = [&](std::size_t j) { return a.data() + j * n; };

  std::vector<double> col_norm(p);
  for (std::size_t j = 0; j < p; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += col(j)[i] * col(j)[i];
    col_norm[j] = std::sqrt(ss);
  }

  // Householder QR; R overwrites the upper triangle of a.
  std::vector<double> v(n);
  for (std::size_t j = 0; j < p; ++j) {
    double norm = 0.0;
    for (std::size_t i = j; i < n; ++i) norm += col(j)[i] * col(j)[i];
    norm = std::sqrt(norm);
    if (!(norm > 1e-10 * col_norm[j]) || col_norm[j] == 0.0) {
      throw DataError("rank-deficient design: column '" + out.names[j] + "' is collinear with earlier terms");
    }
    const double alpha = col(j)[j] > 0 ? -norm : norm;
    double vnorm = 0.0;
    for (std::size_t i = j; i < n; ++i) {
      v[i] = col(j)[i] - (i == j ? alpha : 0.0);
      vnorm += v[i] * v[i];
    }
    auto reflect = [&](double* target) {
      double dot = 0.0;
      for (std::size_t i = j; i < n; ++i) dot += v[i] * target[i];
      const double f = 2.0 * dot / vnorm;
      for (std::size_t i = j; i < n; ++i) target[i] -= f * v[i];
    };
    for (std::size_t c = j + 1; c < p; ++c) reflect(col(c));
    reflect(b.data());
    col(j)[j] = alpha;
    for (std::size_t i = j + 1; i < n; ++i) col(j)[i] = 0.0;
  }
  auto r_at = [&](std::size_t i, std::size_t j) { return a[j * n + i]; };

  out.coefficients.assign(p, 0.0);
  for (std::size_t j = p; j-- > 0;) {
    double s = b[j];
    for (std::size_t c = j + 1; c < p; ++c) s -= r_at(j, c) * out.coefficients[c];
    out.coefficients[j] = s / r_at(j, j);
  }

  out.residuals.resize(n);
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0.0;
    for (std::size_t j = 0; j < p; ++j) fit += design[j * n + i] * out.coefficients[j];
    out.residuals[i] = y[out.rows_used[i]] - fit;
    ssr += out.residuals[i] * out.residuals[i];
  }

  // Inverse of R (upper triangular); (X'X)^-1 = R^-1 R^-T.
  std::vector<double> rinv(p * p, 0.0);  // row-major
  for (std::size_t j = 0; j < p; ++j) {
    rinv[j * p + j] = 1.0 / r_at(j, j);
    for (std::size_t i = j; i-- > 0;) {
      double s = 0.0;
      for (std::size_t c = i + 1; c <= j; ++c) s += r_at(i, c) * rinv[c * p + j];
      rinv[i * p + j] = -s / r_at(i, i);
    }
  }

  const double dof = static_cast<double>(n - p);
  out.std_errors.assign(p, 0.0);
  if (!options.robust) {
    const double sigma2 = ssr / dof;
    for (std::size_t j = 0; j < p; ++j) {
      double d = 0.0;
      for (std::size_t c = 0; c < p; ++c) d += rinv[j * p + c] * rinv[j * p + c];
      out.std_errors[j] = std::sqrt(sigma2 * d);
    }
  } else {
    // cov = R^-1 (B' diag(e^2) B) R^-T * n/(n-p), with B = X R^-1.
    std::vector<double> bmat(n * p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < p; ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j <= c; ++j) s += design[j * n + i] * rinv[j * p + c];
        bmat[i * p + c] = s;
      }
    }
    std::vector<double> meat(p * p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double e2 = out.residuals[i] * out.residuals[i];
      for (std::size_t c1 = 0; c1 < p; ++c1) {
        for (std::size_t c2 = 0; c2 < p; ++c2) meat[c1 * p + c2] += e2 * bmat[i * p + c1] * bmat[i * p + c2];
      }
    }
    const double scale = static_cast<double>(n) / dof;
    for (std::size_t j = 0; j < p; ++j) {
      double d = 0.0;
      for (std::size_t c1 = 0; c1 < p; ++c1) {
        for (std::size_t c2 = 0; c2 < p; ++c2) d += rinv[j * p + c1] * meat[c1 * p + c2] * rinv[j * p + c2];
      }
      out.std_errors[j] = std::sqrt(scale * d);
    }
  }
  out.t_stats.resize(p);
  for (std::size_t j = 0; j < p; ++j) out.t_stats[j] = out.coefficients[j] / out.std_errors[j];

  double sst = 0.0;
  double ysum = 0.0;
  for (auto row : out.rows_used) ysum += y[row];
  const double center = options.intercept ? ysum / static_cast<double>(n) : 0.0;
  for (auto row : out.rows_used) sst += (y[row] - center) * (y[row] - center);
  out.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 0.0;
  out.n_obs = n;
  return out;
}

NamedMatrix correlation_matrix(const CovariateTable& table, std::span<const std::string> variables) {
  NamedMatrix m{std::vector<std::string>(variables.begin(), variables.end()), {}};
  const std::size_t p = variables.size();
  m.values.assign(p * p, 0.0);
  std::vector<std::vector<double>> cols;
  for (const auto& v : variables) cols.push_back(table.column(v));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      std::vector<double> xi, xj;
      for (std::size_t f = 0; f < table.factors.size(); ++f) {
        if (std::isfinite(cols[i][f]) && std::isfinite(cols[j][f])) {
          xi.push_back(cols[i][f]);
          xj.push_back(cols[j][f]);
        }
      }
      if (xi.size() < 2) {
        throw DataError("fewer than two complete rows for '" + m.names[i] + "' and '" + m.names[j] + "'");
      }
      const double mi = stats::mean(xi);
      const double mj = stats::mean(xj);
      double sij = 0.0, sii = 0.0, sjj = 0.0;
      for (std::size_t r = 0; r < xi.size(); ++r) {
        sij += (xi[r] - mi) * (xj[r] - mj);
        sii += (xi[r] - mi) * (xi[r] - mi);
        sjj += (xj[r] - mj) * (xj[r] - mj);
      }
      if (sii == 0.0 || sjj == 0.0) {
        throw DataError("constant column in correlation of '" + m.names[i] + "' and '" + m.names[j] + "'");
      }
      const double rho = i == j ? 1.0 : sij / std::sqrt(sii * sjj);
      m.values[i * p + j] = rho;
      m.values[j * p + i] = rho;
    }
  }
  return m;
}

NamedMatrix correlation_matrix(const CovariateTable& table) { return correlation_matrix(table, table.variables); }

std::vector<OlsResult> univariate_battery(std::span<const double> discounts, const CovariateTable& table,
                                          std::span<const std::string> variables, const OlsOptions& options) {
  if (discounts.size() != table.factors.size()) throw ConfigError("one discount ratio per factor is required");
  std::vector<OlsResult> out;
  for (const auto& v : variables) {
    const Regressor r{v, table.column(v)};
    out.push_back(ols(discounts, std::span<const Regressor>(&r, 1), options));
  }
  return out;
}

std::vector<OlsResult> horse_race(std::span<const double> discounts, const VulnerabilityScores& scores,
                                  std::span<const double> publication_year, const OlsOptions& options) {
  const std::size_t n = discounts.size();
  if (scores.arbitrage.size() != n || scores.overfitting.size() != n || publication_year.size() != n) {
    throw ConfigError("horse race inputs must have one entry per factor");
  }
  Regressor year{kYearRegressor, {}};
  for (double y : publication_year) year.values.push_back(y - 1990.0);
  const Regressor arb{kArbitrageRegressor, scores.arbitrage};
  const Regressor ovf{kOverfittingRegressor, scores.overfitting};

  const std::vector<std::vector<Regressor>> specs = {
      {year}, {arb}, {ovf}, {year, arb, ovf}, {year, ovf}};
  std::vector<OlsResult> out;
  for (const auto& s : specs) out.push_back(ols(discounts, s, options));
  return out;
}

}  // namespace zoo
