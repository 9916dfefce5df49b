#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zoo/date.hpp"

namespace zoo {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

enum class PanelKind { returns, volume, marketcap, signal, mask };

// Dense date x stock matrix, row-major by date. Missing cells hold kMissing
// and are never filled implicitly.
class Panel {
 public:
  Panel() = default;
  // All-missing panel on the given axes.
  Panel(std::vector<Date> dates, std::vector<std::string> stocks);
  Panel(std::vector<Date> dates, std::vector<std::string> stocks, std::vector<double> values);

  std::size_t n_dates() const { return dates_.size(); }
  std::size_t n_stocks() const { return stocks_.size(); }
  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<std::string>& stocks() const { return stocks_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double operator()(std::size_t t, std::size_t s) const { return values_[t * stocks_.size() + s]; }
  double& operator()(std::size_t t, std::size_t s) { return values_[t * stocks_.size() + s]; }
  std::span<const double> row(std::size_t t) const {
    return std::span<const double>(values_).subspan(t * stocks_.size(), stocks_.size());
  }
  std::span<double> row(std::size_t t) {
    return std::span<double>(values_).subspan(t * stocks_.size(), stocks_.size());
  }

  std::optional<std::size_t> date_index(const Date& d) const;
  std::optional<std::size_t> stock_index(const std::string& id) const;
  std::size_t count_missing() const;
  // Number of non-missing cells in row t.
  std::size_t count_present(std::size_t t) const;

  // Rows with dates inside the inclusive range.
  Panel slice_dates(const DateRange& range) const;
  // Columns by position, in the order given.
  Panel select_stocks(std::span<const std::size_t> columns) const;
  // Same axes, values replaced.
  Panel with_values(std::vector<double> values) const;

 private:
  void validate() const;

  std::vector<Date> dates_;
  std::vector<std::string> stocks_;
  std::vector<double> values_;
};

// A dated univariate series, e.g. market returns.
struct DatedSeries {
  std::vector<Date> dates;
  std::vector<double> values;

  std::size_t size() const { return dates.size(); }
  std::optional<double> at(const Date& d) const;
};

// Wide CSV: `date,<stock>,<stock>,...`, empty cell = missing.
Panel read_panel(std::istream& in, PanelKind kind = PanelKind::returns);
Panel load_panel(const std::filesystem::path& path, PanelKind kind = PanelKind::returns);
void write_panel(std::ostream& out, const Panel& panel);
void save_panel(const Panel& panel, const std::filesystem::path& path);

// Two-column CSV: `date,value`.
DatedSeries load_series(const std::filesystem::path& path);
void save_series(const DatedSeries& series, const std::filesystem::path& path,
                 const std::string& value_header = "value");

// Restricts every panel to the common dates and the union of stocks.
std::vector<Panel> align(std::span<const Panel> panels);

// Delays every value so that an observation dated t is first visible at the
// first panel date whose month is at least t + months.
Panel embargo_shift(const Panel& panel, int months = 4);

// Shortest text that parses back to the same double; empty for missing.
std::string format_number(double v);

}  // namespace zoo
