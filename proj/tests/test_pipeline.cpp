#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "zoo/config.hpp"
#include "zoo/errors.hpp"
#include "zoo/pipeline.hpp"

using namespace zoo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("zoo_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small_config(const fs::path& out) {
  RunConfig c;
  c.output_dir = out;
  c.synthetic.n_stocks = 120;
  c.synthetic.n_months = 360;
  c.synthetic.n_factors = 6;
  c.n_draws = 5;
  c.two_step_draws = 10;
  c.hedge_window = 24;
  c.embargo = 0;
  c.seed = 11;
  c.synthetic.seed = 11;
  return c;
}

SharpeReport report(double sr) {
  SharpeReport r;
  r.sr_annual = sr;
  return r;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config defaults and settings") {
  const RunConfig c;
  CHECK(c.q == 0.10);
  CHECK(c.hedge_window == 36);
  CHECK(c.embargo == 4);
  CHECK(c.sr_threshold == 0.3);
  CHECK(c.q_set.size() == 7);
  CHECK(c.n_draws == 100);
  CHECK(c.drop_frac_subset == 0.10);
  CHECK(c.drop_frac_contrib == 0.001);
  CHECK(c.subset_per_date);
  CHECK_FALSE(c.drop_by_absolute);

  RunConfig d;
  apply_setting(d, " q ", " 0.2 ");
  apply_setting(d, "q_set", "0.1,0.2");
  apply_setting(d, "hedge", "false");
  apply_setting(d, "seed", "99");
  CHECK(d.q == 0.2);
  CHECK(d.q_set == std::vector<double>{0.1, 0.2});
  CHECK_FALSE(d.hedge);
  CHECK(d.synthetic.seed == 99);
  CHECK_THROWS_AS(apply_setting(d, "no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(d, "q", "abc"), ConfigError);
  CHECK_THROWS_AS(apply_setting(d, "hedge", "maybe"), ConfigError);
}

TEST_CASE("config file resolves relative paths and rejects unknown keys") {
  const auto dir = scratch("cfg");
  {
    std::ofstream f(dir / "a.cfg");
    f << "# comment\nreturns = data/r.csv\nq=0.15\n\nn_draws = 7\n";
  }
  RunConfig c;
  apply_config_file(c, dir / "a.cfg");
  CHECK(c.returns == dir / "data/r.csv");
  CHECK(c.q == 0.15);
  CHECK(c.n_draws == 7);
  {
    std::ofstream f(dir / "b.cfg");
    f << "bogus=1\n";
  }
  CHECK_THROWS_AS(apply_config_file(c, dir / "b.cfg"), ConfigError);
  CHECK_THROWS_AS(apply_config_file(c, dir / "missing.cfg"), ConfigError);

  // The dump reads back to the same dump.
  {
    std::ofstream f(dir / "c.cfg");
    f << to_string(c);
  }
  RunConfig back;
  apply_config_file(back, dir / "c.cfg");
  CHECK(to_string(back) == to_string(c));
}

TEST_CASE("seed environment variable") {
  ::setenv(kSeedEnvVar, "4242", 1);
  const auto c = default_config();
  ::unsetenv(kSeedEnvVar);
  CHECK(c.seed == 4242);
  CHECK(default_config().seed == 1);
}

TEST_CASE("config validation") {
  RunConfig c;
  c.q = 0.6;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.hedge_window = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.drop_frac_subset = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_NOTHROW(RunConfig{}.validate());
}

TEST_CASE("threshold filter keeps the boundary") {
  const std::vector<SharpeReport> r{report(0.3), report(0.29), report(1.2), report(-0.5)};
  const auto f = filter_factors(r, 0.3);
  CHECK(f.included == std::vector<std::size_t>{0, 2});
  CHECK(f.excluded == std::vector<std::size_t>{1, 3});
  const std::vector<SharpeReport> low{report(0.1), report(0.2)};
  CHECK(filter_factors(low, 0.3).included.empty());
}

TEST_CASE("low Sharpe factors are listed as exclusions") {
  std::vector<FactorMeasurement> m(2);
  m[0].name = "weak";
  m[0].is = report(0.2);
  m[1].name = "strong";
  m[1].is = report(0.8);
  apply_filter(m, 0.3);
  CHECK_FALSE(m[0].included);
  CHECK_FALSE(m[0].exclusion_reason.empty());
  CHECK(m[1].included);

  const auto dir = scratch("excl");
  write_measurements(m, dir);
  const auto text = slurp(dir / "exclusions.csv");
  CHECK(text.find("weak") != std::string::npos);
  CHECK(text.find("strong") == std::string::npos);
  const auto rows = read_metrics(dir / "metrics.csv");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].name == "strong");
}

TEST_CASE("metrics and covariate CSV round trips") {
  const auto dir = scratch("csv");
  std::vector<MetricsRow> rows{{"a", 0.5, 0.25, 2.0, 0.5, 0.3, 0.2}, {"b", 1.0 / 3.0, -0.1, 1.5, -0.3, kMissing, 0.1}};
  write_metrics(rows, dir / "m.csv");
  const auto back = read_metrics(dir / "m.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].name == "b");
  CHECK(back[1].sr_is == rows[1].sr_is);
  CHECK(std::isnan(back[1].sr_simple_adj));

  CovariateTable t({"f1", "f2"}, {"x", "y"});
  t.values = {0.1, kMissing, -2.5, 1e-7};
  write_covariates(t, dir / "c.csv");
  const auto tb = read_covariates(dir / "c.csv", true);
  CHECK(tb.factors == t.factors);
  CHECK(tb.variables == t.variables);
  CHECK(tb.standardized);
  for (std::size_t i = 0; i < 4; ++i) CHECK(testing::same_bits(tb.values[i], t.values[i]));

  {
    std::ofstream f(dir / "bad.csv");
    f << "name,sr_is\na,1\n";
  }
  CHECK_THROWS_AS(read_metrics(dir / "bad.csv"), DataError);
}

TEST_CASE("regression table layout") {
  const auto dir = scratch("table");
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<double> x(20), y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    x[i] = z(rng);
    y[i] = x[i] + z(rng);
  }
  const std::vector<Regressor> r{{"x", x}};
  const std::vector<OlsResult> res{ols(y, r), ols(y, r)};
  write_regression_table(res, dir / "t.csv");
  std::istringstream in(slurp(dir / "t.csv"));
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "term,(1),(2)");
  CHECK(lines[1].rfind("x,", 0) == 0);
  CHECK(lines[2].rfind(",(", 0) == 0);
  CHECK(lines[3].rfind("const,", 0) == 0);
  CHECK(lines[5] == "N,20,20");
  CHECK(lines[6].rfind("R2,", 0) == 0);
}

TEST_CASE("dataset save and load round trip") {
  ZooParams p;
  p.n_stocks = 40;
  p.n_months = 360;
  p.n_factors = 3;
  p.seed = 5;
  const auto data = make_synthetic_dataset(p);
  const auto dir = scratch("dataset");
  save_dataset(data, dir);
  RunConfig c;
  apply_config_file(c, dir / "dataset.cfg");
  const auto back = load_dataset(c);
  CHECK(back.returns.dates() == data.returns.dates());
  CHECK(back.returns.stocks() == data.returns.stocks());
  for (std::size_t i = 0; i < data.returns.values().size(); ++i) {
    CHECK(testing::same_bits(back.returns.values()[i], data.returns.values()[i]));
  }
  REQUIRE(back.factors.size() == 3);
  for (std::size_t f = 0; f < 3; ++f) {
    CHECK(back.factors[f].name == data.factors[f].name);
    CHECK(back.factors[f].publication_date == data.factors[f].publication_date);
    CHECK(back.factors[f].in_sample_end == data.factors[f].in_sample_end);
    bool same = true;
    for (std::size_t i = 0; i < data.factors[f].signal.values().size(); ++i) {
      same = same && testing::same_bits(back.factors[f].signal.values()[i], data.factors[f].signal.values()[i]);
    }
    CHECK(same);
  }
  REQUIRE(back.market);
  CHECK(back.market->values == data.market->values);
  REQUIRE(back.pools.size() == data.pools.size());
}

TEST_CASE("same seed and config give byte-identical bundles") {
  const auto a = scratch("run_a"), b = scratch("run_b");
  const auto sa = run_pipeline(small_config(a));
  run_pipeline(small_config(b));
  CHECK(sa.n_factors == 6);
  std::vector<std::string> names;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    if (rel == "config.cfg") continue;  // records the output directory
    names.push_back(rel.string());
    REQUIRE(fs::exists(b / rel));
    CHECK_MESSAGE(slurp(e.path()) == slurp(b / rel), rel.string());
  }
  CHECK(std::find(names.begin(), names.end(), "metrics.csv") != names.end());
  CHECK(std::find(names.begin(), names.end(), "covariates_raw.csv") != names.end());
  CHECK(std::find(names.begin(), names.end(), "event_study.csv") != names.end());
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
  CHECK(count_b == names.size() + 1);
}

TEST_CASE("a bundle's recorded config reproduces it") {
  ZooParams p;
  p.n_stocks = 100;
  p.n_months = 360;
  p.n_factors = 3;
  p.seed = 8;
  const auto dir = scratch("replay");
  save_dataset(make_synthetic_dataset(p), dir / "data");
  RunConfig first = small_config(dir / "first");
  apply_config_file(first, dir / "data" / "dataset.cfg");
  run_pipeline(first);

  RunConfig again;
  apply_config_file(again, dir / "first" / "config.cfg");
  CHECK(fs::exists(again.returns));
  again.output_dir = dir / "again";
  run_pipeline(again);
  CHECK(slurp(dir / "first" / "metrics.csv") == slurp(dir / "again" / "metrics.csv"));
  CHECK(slurp(dir / "first" / "covariates_raw.csv") == slurp(dir / "again" / "covariates_raw.csv"));
}

TEST_CASE("covariates ignore data after the in-sample period") {
  auto config = small_config(scratch("causal"));
  config.sr_threshold = -100.0;
  auto data = make_synthetic_dataset(config.synthetic);
  auto m = measure_factors(data, config, false);
  apply_filter(m, config.sr_threshold);
  const auto before = compute_covariates(data, m, config);

  Date last_is = data.factors.front().in_sample_end;
  for (const auto& f : data.factors) last_is = std::max(last_is, f.in_sample_end);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  auto mutate = [&](Panel& p) {
    for (std::size_t t = 0; t < p.n_dates(); ++t) {
      if (p.dates()[t] <= last_is) continue;
      for (auto& v : p.row(t)) v *= u(rng);
    }
  };
  mutate(data.returns);
  mutate(*data.volume);
  mutate(*data.marketcap);
  auto m2 = measure_factors(data, config, false);
  apply_filter(m2, config.sr_threshold);
  const auto after = compute_covariates(data, m2, config);

  REQUIRE(before.values.size() == after.values.size());
  for (std::size_t i = 0; i < before.values.size(); ++i) CHECK(testing::same_bits(before.values[i], after.values[i]));
  for (std::size_t f = 0; f < m.size(); ++f) CHECK(m[f].is.sr_annual == m2[f].is.sr_annual);
}

#ifdef ZOO_CLI_PATH
TEST_CASE("command-line exit codes") {
  const std::string cli = ZOO_CLI_PATH;
  const auto dir = scratch("cli");
  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " >" + (dir / "out.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run("--help") == 0);
  CHECK(run("--no-such-flag") == 2);
  CHECK(run("run --set no_such_key=1 --out " + (dir / "b").string()) == 2);
  CHECK(run("backtest --signal " + (dir / "none.csv").string() + " --returns " + (dir / "none.csv").string()) == 2);
  {
    std::ofstream f(dir / "junk.csv");
    f << "date,S1\nnot-a-date,abc\n";
  }
  CHECK(run("backtest --signal " + (dir / "junk.csv").string() + " --returns " + (dir / "junk.csv").string() +
            " --out " + (dir / "pnl.csv").string()) == 3);
  CHECK(run("simulate --model market --stocks 50 --months 36 --out " + (dir / "sim").string()) == 0);
  CHECK(fs::exists(dir / "sim"));
}
#endif

}  // TEST_SUITE
