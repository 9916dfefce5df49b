#include "zoo/panel.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "zoo/errors.hpp"

namespace zoo {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

double parse_cell(std::string_view cell) {
  if (cell.empty()) return kMissing;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) return kMissing;
  return v;
}

void merge_cell(double& into, double value, const Date& date, const std::string& stock) {
  if (is_missing(value)) return;
  if (!is_missing(into)) {
    throw DataError("duplicate cell for date " + date.iso() + ", stock '" + stock + "'");
  }
  into = value;
}

void check_monthly(const std::vector<Date>& dates) {
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (dates[i].month_index() == dates[i - 1].month_index()) {
      throw DataError("more than one date in month of " + dates[i].iso() +
                      "; aggregate to monthly first");
    }
  }
}

}  // namespace

Panel::Panel(std::vector<Date> dates, std::vector<std::string> stocks)
    : dates_(std::move(dates)), stocks_(std::move(stocks)),
      values_(dates_.size() * stocks_.size(), kMissing) {
  validate();
}

Panel::Panel(std::vector<Date> dates, std::vector<std::string> stocks, std::vector<double> values)
    : dates_(std::move(dates)), stocks_(std::move(stocks)), values_(std::move(values)) {
  validate();
}

void Panel::validate() const {
  if (values_.size() != dates_.size() * stocks_.size()) {
    throw DataError("panel values do not match " + std::to_string(dates_.size()) + " x " +
                    std::to_string(stocks_.size()) + " axes");
  }
  for (std::size_t i = 1; i < dates_.size(); ++i) {
    if (!(dates_[i - 1] < dates_[i])) throw DataError("panel dates must be strictly increasing");
  }
  std::vector<std::string_view> ids(stocks_.begin(), stocks_.end());
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw DataError("panel stock identifiers must be unique");
  }
}

std::optional<std::size_t> Panel::date_index(const Date& d) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end() || !(*it == d)) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

std::optional<std::size_t> Panel::stock_index(const std::string& id) const {
  auto it = std::find(stocks_.begin(), stocks_.end(), id);
  if (it == stocks_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - stocks_.begin());
}

std::size_t Panel::count_missing() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), is_missing));
}

std::size_t Panel::count_present(std::size_t t) const {
  auto r = row(t);
  return static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [](double v) { return !is_missing(v); }));
}

Panel Panel::slice_dates(const DateRange& range) const {
  std::vector<Date> dates;
  std::vector<double> values;
  for (std::size_t t = 0; t < dates_.size(); ++t) {
    if (!range.contains(dates_[t])) continue;
    dates.push_back(dates_[t]);
    auto r = row(t);
    values.insert(values.end(), r.begin(), r.end());
  }
  return Panel(std::move(dates), stocks_, std::move(values));
}

Panel Panel::select_stocks(std::span<const std::size_t> columns) const {
  std::vector<std::string> stocks;
  stocks.reserve(columns.size());
  for (auto c : columns) stocks.push_back(stocks_.at(c));
  std::vector<double> values(dates_.size() * columns.size());
  for (std::size_t t = 0; t < dates_.size(); ++t) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      values[t * columns.size() + j] = (*this)(t, columns[j]);
    }
  }
  return Panel(dates_, std::move(stocks), std::move(values));
}

Panel Panel::with_values(std::vector<double> values) const {
  return Panel(dates_, stocks_, std::move(values));
}

std::optional<double> DatedSeries::at(const Date& d) const {
  auto it = std::lower_bound(dates.begin(), dates.end(), d);
  if (it == dates.end() || !(*it == d)) return std::nullopt;
  return values[static_cast<std::size_t>(it - dates.begin())];
}

std::string format_number(double v) {
  if (is_missing(v)) return {};
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Panel read_panel(std::istream& in, PanelKind kind) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty panel file");
  const auto header = split_csv(line);
  if (header.empty() || header.front() != "date") {
    throw DataError("malformed header: first column must be 'date'");
  }
  if (header.size() < 2) throw DataError("malformed header: no stock columns");

  // Deduplicate stock columns, keeping first-seen order.
  std::vector<std::string> stocks;
  std::vector<std::size_t> column_to_stock;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string id(header[c]);
    if (id.empty()) throw DataError("malformed header: empty stock identifier in column " + std::to_string(c));
    auto [it, inserted] = seen.emplace(id, stocks.size());
    if (inserted) stocks.push_back(id);
    column_to_stock.push_back(it->second);
  }

  std::map<Date, std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " cells, found " + std::to_string(cells.size()));
    }
    const Date date = Date::parse(cells.front());
    auto [it, inserted] = rows.try_emplace(date, stocks.size(), kMissing);
    auto& row = it->second;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const double v = parse_cell(cells[c]);
      const auto s = column_to_stock[c - 1];
      if (kind == PanelKind::mask && !is_missing(v) && v != 0.0 && v != 1.0) {
        throw DataError("mask panel holds a value other than 0/1 at " + date.iso());
      }
      merge_cell(row[s], v, date, stocks[s]);
    }
  }

  std::vector<Date> dates;
  std::vector<double> values;
  dates.reserve(rows.size());
  values.reserve(rows.size() * stocks.size());
  for (auto& [d, r] : rows) {
    dates.push_back(d);
    values.insert(values.end(), r.begin(), r.end());
  }
  return Panel(std::move(dates), std::move(stocks), std::move(values));
}

Panel load_panel(const std::filesystem::path& path, PanelKind kind) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open panel file " + path.string());
  try {
    return read_panel(in, kind);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_panel(std::ostream& out, const Panel& panel) {
  out << "date";
  for (const auto& s : panel.stocks()) out << ',' << s;
  out << '\n';
  for (std::size_t t = 0; t < panel.n_dates(); ++t) {
    out << panel.dates()[t].iso();
    for (double v : panel.row(t)) out << ',' << format_number(v);
    out << '\n';
  }
}

void save_panel(const Panel& panel, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write panel file " + path.string());
  write_panel(out, panel);
}

DatedSeries load_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open series file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty series file");
  const auto header = split_csv(line);
  if (header.size() != 2 || header.front() != "date") {
    throw DataError(path.string() + ": series header must be 'date,<name>'");
  }
  std::map<Date, double> points;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw DataError(path.string() + ": series rows need exactly two cells");
    const Date d = Date::parse(cells[0]);
    if (!points.emplace(d, parse_cell(cells[1])).second) {
      throw DataError(path.string() + ": duplicate date " + d.iso());
    }
  }
  DatedSeries series;
  for (auto& [d, v] : points) {
    series.dates.push_back(d);
    series.values.push_back(v);
  }
  return series;
}

void save_series(const DatedSeries& series, const std::filesystem::path& path,
                 const std::string& value_header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write series file " + path.string());
  out << "date," << value_header << '\n';
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << series.dates[i].iso() << ',' << format_number(series.values[i]) << '\n';
  }
}

std::vector<Panel> align(std::span<const Panel> panels) {
  if (panels.empty()) throw ConfigError("align needs at least one panel");
  for (const auto& p : panels) check_monthly(p.dates());

  // Dates are matched by calendar month; the first panel's dates label the output.
  std::vector<Date> dates;
  for (const auto& d : panels.front().dates()) {
    const bool everywhere = std::all_of(panels.begin() + 1, panels.end(), [&](const Panel& p) {
      return std::any_of(p.dates().begin(), p.dates().end(),
                         [&](const Date& o) { return o.month_index() == d.month_index(); });
    });
    if (everywhere) dates.push_back(d);
  }
  if (dates.empty()) throw DataError("aligned panels share no dates");

  std::vector<std::string> stocks;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& p : panels) {
    for (const auto& s : p.stocks()) {
      if (index.emplace(s, stocks.size()).second) stocks.push_back(s);
    }
  }

  std::vector<Panel> out;
  out.reserve(panels.size());
  for (const auto& p : panels) {
    std::map<std::int64_t, std::size_t> row_of_month;
    for (std::size_t t = 0; t < p.n_dates(); ++t) row_of_month[p.dates()[t].month_index()] = t;
    std::vector<std::size_t> col(p.n_stocks());
    for (std::size_t s = 0; s < p.n_stocks(); ++s) col[s] = index.at(p.stocks()[s]);

    Panel aligned(dates, stocks);
    for (std::size_t t = 0; t < dates.size(); ++t) {
      const auto src = row_of_month.at(dates[t].month_index());
      for (std::size_t s = 0; s < p.n_stocks(); ++s) aligned(t, col[s]) = p(src, s);
    }
    out.push_back(std::move(aligned));
  }
  return out;
}

Panel embargo_shift(const Panel& panel, int months) {
  if (months < 1) throw ConfigError("embargo months must be at least 1");
  Panel out(panel.dates(), panel.stocks());
  std::size_t visible = 0;  // source rows old enough to be used at row t
  for (std::size_t t = 0; t < panel.n_dates(); ++t) {
    const auto cutoff = panel.dates()[t].month_index() - months;
    while (visible < panel.n_dates() && panel.dates()[visible].month_index() <= cutoff) ++visible;
    if (visible == 0) continue;
    auto from = panel.row(visible - 1);
    std::copy(from.begin(), from.end(), out.row(t).begin());
  }
  return out;
}

}  // namespace zoo
