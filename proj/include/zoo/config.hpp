#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "zoo/synthetic.hpp"

namespace zoo {

// Environment variable that replaces the default seed before any config file
// or flag is applied.
inline constexpr const char* kSeedEnvVar = "FACTORZOO_SEED";

struct RunConfig {
  // Inputs. With no returns path the run generates a synthetic zoo instead.
  std::filesystem::path returns;
  std::filesystem::path volume;
  std::filesystem::path marketcap;
  std::filesystem::path market;
  std::filesystem::path factors;
  std::map<std::string, std::filesystem::path> pools;  // name -> 0/1 mask panel
  std::filesystem::path output_dir = "bundle";

  double q = 0.10;
  int hedge_window = 36;
  bool hedge = true;
  int embargo = 4;  // months; 0 leaves signals as loaded
  double sr_threshold = 0.3;
  std::vector<double> q_set = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35};
  std::size_t n_draws = 100;
  double drop_frac_subset = 0.10;
  double drop_frac_contrib = 0.001;
  bool subset_per_date = true;
  bool drop_by_absolute = false;
  std::uint64_t seed = 1;

  // Artifact-chosen settings.
  bool two_step = true;
  std::size_t two_step_draws = 50;
  int event_horizon_days = 2000;
  double event_target_vol = 0.10;
  bool robust_se = false;
  std::vector<std::string> arb_vars;      // empty: all arbitrage covariates
  std::vector<std::string> overfit_vars;  // empty: all overfitting covariates

  ZooParams synthetic;

  bool synthetic_mode() const { return returns.empty(); }
  void validate() const;
};

// Defaults with the seed taken from FACTORZOO_SEED when set.
RunConfig default_config();

// Applies one key=value setting. Throws ConfigError on unknown keys or bad values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

// Reads a flat key=value file; '#' starts a comment. Relative paths are
// resolved against the file's directory.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// Canonical key=value dump, one setting per line.
std::string to_string(const RunConfig& config);

}  // namespace zoo
