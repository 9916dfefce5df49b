#include "zoo/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "zoo/errors.hpp"
#include "zoo/panel.hpp"

namespace zoo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("bad value '" + text + "' for " + key);
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("bad boolean '" + text + "' for " + key);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& i : items) out += (out.empty() ? "" : ",") + i;
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (!(q > 0.0 && q <= 0.5)) throw ConfigError("q must lie in (0, 0.5]");
  if (hedge_window < 12) throw ConfigError("hedge_window must be at least 12");
  if (embargo < 0) throw ConfigError("embargo must be nonnegative");
  if (!(sr_threshold >= 0.0)) throw ConfigError("sr_threshold must be nonnegative");
  if (q_set.empty()) throw ConfigError("q_set must not be empty");
  for (double v : q_set) {
    if (!(v > 0.0 && v <= 0.5)) throw ConfigError("q_set entries must lie in (0, 0.5]");
  }
  if (n_draws < 2) throw ConfigError("n_draws must be at least 2");
  if (!(drop_frac_subset > 0.0 && drop_frac_subset < 1.0)) throw ConfigError("drop_frac_subset must lie in (0, 1)");
  if (!(drop_frac_contrib > 0.0 && drop_frac_contrib < 1.0)) throw ConfigError("drop_frac_contrib must lie in (0, 1)");
  if (two_step_draws < 10) throw ConfigError("two_step_draws must be at least 10");
  if (event_horizon_days <= 0) throw ConfigError("event_horizon_days must be positive");
  if (!synthetic_mode() && factors.empty()) throw ConfigError("factors metadata path is required with returns");
  if (synthetic_mode()) synthetic.validate();
}

RunConfig default_config() {
  RunConfig c;
  if (const char* env = std::getenv(kSeedEnvVar); env && *env) {
    c.seed = parse_value<std::uint64_t>(kSeedEnvVar, env);
    c.synthetic.seed = c.seed;
  }
  return c;
}

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  auto as_double = [&] { return parse_value<double>(key, value); };
  auto as_int = [&] { return parse_value<int>(key, value); };
  auto as_size = [&] { return parse_value<std::size_t>(key, value); };

  if (key == "returns") c.returns = value;
  else if (key == "volume") c.volume = value;
  else if (key == "marketcap") c.marketcap = value;
  else if (key == "market") c.market = value;
  else if (key == "factors") c.factors = value;
  else if (key == "output_dir") c.output_dir = value;
  else if (key.rfind("pool.", 0) == 0 && key.size() > 5) c.pools[key.substr(5)] = value;
  else if (key == "q") c.q = as_double();
  else if (key == "hedge_window") c.hedge_window = as_int();
  else if (key == "hedge") c.hedge = parse_bool(key, value);
  else if (key == "embargo") c.embargo = as_int();
  else if (key == "sr_threshold") c.sr_threshold = as_double();
  else if (key == "q_set") {
    c.q_set.clear();
    for (const auto& item : split_list(value)) c.q_set.push_back(parse_value<double>(key, item));
  } else if (key == "n_draws") c.n_draws = as_size();
  else if (key == "drop_frac_subset") c.drop_frac_subset = as_double();
  else if (key == "drop_frac_contrib") c.drop_frac_contrib = as_double();
  else if (key == "subset_per_date") c.subset_per_date = parse_bool(key, value);
  else if (key == "drop_by_absolute") c.drop_by_absolute = parse_bool(key, value);
  else if (key == "seed") {
    c.seed = parse_value<std::uint64_t>(key, value);
    c.synthetic.seed = c.seed;
  } else if (key == "two_step") c.two_step = parse_bool(key, value);
  else if (key == "two_step_draws") c.two_step_draws = as_size();
  else if (key == "event_horizon_days") c.event_horizon_days = as_int();
  else if (key == "event_target_vol") c.event_target_vol = as_double();
  else if (key == "robust_se") c.robust_se = parse_bool(key, value);
  else if (key == "arb_vars") c.arb_vars = split_list(value);
  else if (key == "overfit_vars") c.overfit_vars = split_list(value);
  else if (key == "synthetic.n_stocks") c.synthetic.n_stocks = as_size();
  else if (key == "synthetic.n_months") c.synthetic.n_months = as_size();
  else if (key == "synthetic.n_factors") c.synthetic.n_factors = as_size();
  else if (key == "synthetic.sigma_eta") c.synthetic.sigma_eta = as_double();
  else if (key == "synthetic.sigma_eps") c.synthetic.sigma_eps = as_double();
  else if (key == "synthetic.market_vol") c.synthetic.market_vol = as_double();
  else if (key == "synthetic.year_slope") c.synthetic.year_slope = as_double();
  else if (key == "synthetic.seed") c.synthetic.seed = parse_value<std::uint64_t>(key, value);
  else throw ConfigError("unknown setting '" + key + "'");
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  const auto base = path.parent_path();
  const char* path_keys[] = {"returns", "volume", "marketcap", "market", "factors", "output_dir"};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const bool is_path = std::find(std::begin(path_keys), std::end(path_keys), key) != std::end(path_keys) ||
                         key.rfind("pool.", 0) == 0;
    if (is_path && !value.empty() && std::filesystem::path(value).is_relative()) {
      value = (base / value).string();
    }
    apply_setting(config, key, value);
  }
}

std::string to_string(const RunConfig& c) {
  std::ostringstream out;
  out << "returns=" << c.returns.string() << '\n'
      << "volume=" << c.volume.string() << '\n'
      << "marketcap=" << c.marketcap.string() << '\n'
      << "market=" << c.market.string() << '\n'
      << "factors=" << c.factors.string() << '\n';
  for (const auto& [name, path] : c.pools) out << "pool." << name << '=' << path.string() << '\n';
  out << "q=" << format_number(c.q) << '\n'
      << "hedge=" << (c.hedge ? "true" : "false") << '\n'
      << "hedge_window=" << c.hedge_window << '\n'
      << "embargo=" << c.embargo << '\n'
      << "sr_threshold=" << format_number(c.sr_threshold) << '\n';
  std::vector<std::string> qs;
  for (double v : c.q_set) qs.push_back(format_number(v));
  out << "q_set=" << join(qs) << '\n'
      << "n_draws=" << c.n_draws << '\n'
      << "drop_frac_subset=" << format_number(c.drop_frac_subset) << '\n'
      << "drop_frac_contrib=" << format_number(c.drop_frac_contrib) << '\n'
      << "subset_per_date=" << (c.subset_per_date ? "true" : "false") << '\n'
      << "drop_by_absolute=" << (c.drop_by_absolute ? "true" : "false") << '\n'
      << "seed=" << c.seed << '\n'
      << "two_step=" << (c.two_step ? "true" : "false") << '\n'
      << "two_step_draws=" << c.two_step_draws << '\n'
      << "event_horizon_days=" << c.event_horizon_days << '\n'
      << "event_target_vol=" << format_number(c.event_target_vol) << '\n'
      << "robust_se=" << (c.robust_se ? "true" : "false") << '\n'
      << "arb_vars=" << join(c.arb_vars) << '\n'
      << "overfit_vars=" << join(c.overfit_vars) << '\n';
  if (c.synthetic_mode()) {
    out << "synthetic.n_stocks=" << c.synthetic.n_stocks << '\n'
        << "synthetic.n_months=" << c.synthetic.n_months << '\n'
        << "synthetic.n_factors=" << c.synthetic.n_factors << '\n'
        << "synthetic.sigma_eta=" << format_number(c.synthetic.sigma_eta) << '\n'
        << "synthetic.sigma_eps=" << format_number(c.synthetic.sigma_eps) << '\n'
        << "synthetic.market_vol=" << format_number(c.synthetic.market_vol) << '\n'
        << "synthetic.year_slope=" << format_number(c.synthetic.year_slope) << '\n'
        << "synthetic.seed=" << c.synthetic.seed << '\n';
  }
  return out.str();
}

}  // namespace zoo
