#include "zoo/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "zoo/errors.hpp"

namespace zoo {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_or_missing(const std::string& text) {
  if (text.empty()) return kMissing;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return kMissing;
  return v;
}

bool getline_trimmed(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

void write_metrics(std::span<const MetricsRow> rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << r.name << ',' << format_number(r.sr_is) << ',' << format_number(r.sr_oos) << ','
        << format_number(r.t_is) << ',' << format_number(r.discount) << ',' << format_number(r.sr_simple_adj)
        << ',' << format_number(r.sr_two_step) << '\n';
  }
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!getline_trimmed(in, line) || line != kMetricsHeader) {
    throw DataError(path.string() + ": header must be '" + kMetricsHeader + "'");
  }
  std::vector<MetricsRow> rows;
  while (getline_trimmed(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 7) throw DataError(path.string() + ": metrics rows need 7 cells");
    rows.push_back(MetricsRow{c[0], parse_or_missing(c[1]), parse_or_missing(c[2]), parse_or_missing(c[3]),
                              parse_or_missing(c[4]), parse_or_missing(c[5]), parse_or_missing(c[6])});
  }
  return rows;
}

void write_covariates(const CovariateTable& table, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "factor";
  for (const auto& v : table.variables) out << ',' << v;
  out << '\n';
  for (std::size_t f = 0; f < table.factors.size(); ++f) {
    out << table.factors[f];
    for (std::size_t v = 0; v < table.variables.size(); ++v) out << ',' << format_number(table(f, v));
    out << '\n';
  }
}

CovariateTable read_covariates(const std::filesystem::path& path, bool standardized) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!getline_trimmed(in, line)) throw DataError(path.string() + ": empty covariate file");
  auto header = split(line);
  if (header.empty() || header.front() != "factor") throw DataError(path.string() + ": first column must be 'factor'");
  std::vector<std::string> variables(header.begin() + 1, header.end());
  std::vector<std::string> factors;
  std::vector<std::vector<double>> rows;
  while (getline_trimmed(in, line)) {
    if (line.empty()) continue;
    auto c = split(line);
    if (c.size() != header.size()) throw DataError(path.string() + ": ragged covariate row");
    factors.push_back(c[0]);
    std::vector<double> r;
    for (std::size_t i = 1; i < c.size(); ++i) r.push_back(parse_or_missing(c[i]));
    rows.push_back(std::move(r));
  }
  CovariateTable table(factors, variables);
  for (std::size_t f = 0; f < rows.size(); ++f) {
    for (std::size_t v = 0; v < variables.size(); ++v) table(f, v) = rows[f][v];
  }
  table.standardized = standardized;
  return table;
}

void write_summary(std::span<const SummaryRow> rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "variable,mean,median,q1,q3,n\n";
  for (const auto& r : rows) {
    out << r.variable << ',' << format_number(r.mean) << ',' << format_number(r.median) << ','
        << format_number(r.q1) << ',' << format_number(r.q3) << ',' << r.n << '\n';
  }
}

void write_regression_table(std::span<const OlsResult> results, const std::filesystem::path& path) {
  std::vector<std::string> terms;
  for (const auto& r : results) {
    for (const auto& n : r.names) {
      if (n != kConstantName && std::find(terms.begin(), terms.end(), n) == terms.end()) terms.push_back(n);
    }
  }
  terms.push_back(kConstantName);

  auto out = open_out(path);
  out << "term";
  for (std::size_t i = 0; i < results.size(); ++i) out << ",(" << i + 1 << ')';
  out << '\n';
  for (const auto& term : terms) {
    std::string coef_row = term;
    std::string t_row;
    for (const auto& r : results) {
      auto it = std::find(r.names.begin(), r.names.end(), term);
      if (it == r.names.end()) {
        coef_row += ',';
        t_row += ',';
        continue;
      }
      const auto j = static_cast<std::size_t>(it - r.names.begin());
      coef_row += ',' + format_number(r.coefficients[j]);
      t_row += ",(" + format_number(r.t_stats[j]) + ')';
    }
    out << coef_row << '\n' << t_row << '\n';
  }
  out << 'N';
  for (const auto& r : results) out << ',' << r.n_obs;
  out << "\nR2";
  for (const auto& r : results) out << ',' << format_number(r.r_squared);
  out << '\n';
}

void write_correlation(const NamedMatrix& matrix, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "variable";
  for (const auto& n : matrix.names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < matrix.names.size(); ++i) {
    out << matrix.names[i];
    for (std::size_t j = 0; j < matrix.names.size(); ++j) out << ',' << format_number(matrix(i, j));
    out << '\n';
  }
}

void write_event_study(std::span<const EventPoint> curve, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "month_offset,day_offset,value,n_factors\n";
  for (const auto& p : curve) {
    out << p.month_offset << ',' << format_number(p.day_offset) << ',' << format_number(p.value) << ','
        << p.n_factors << '\n';
  }
}

void write_plot_data(const std::filesystem::path& path, std::span<const std::pair<std::string, std::string>> points) {
  auto out = open_out(path);
  out << "x y\n";
  for (const auto& [x, y] : points) out << x << ' ' << y << '\n';
}

}  // namespace zoo
