#include <doctest.h>

#include "helpers.hpp"
#include "zoo/errors.hpp"
#include "zoo/metrics.hpp"
#include "zoo/portfolio.hpp"
#include "zoo/stats.hpp"
#include "zoo/synthetic.hpp"

using namespace zoo;

namespace {

// Raw rank-signal portfolio s_t' r_{t+1}, computed without the library's
// weight construction.
std::vector<double> rank_pnl(const SyntheticMarket& m) {
  std::vector<double> pnl;
  for (std::size_t t = 0; t + 1 < m.returns.n_dates(); ++t) {
    double v = 0.0;
    for (std::size_t s = 0; s < m.returns.n_stocks(); ++s) v += m.signal(t, s) * m.returns(t + 1, s);
    pnl.push_back(v);
  }
  return pnl;
}

}  // namespace

TEST_SUITE("synthetic_market") {

TEST_CASE("same seed gives bitwise identical markets, another seed does not") {
  MarketModelParams p;
  p.n_stocks = 30;
  p.n_months = 50;
  p.sigma_eta = 0.02;
  const auto a = generate_market(p);
  const auto b = generate_market(p);
  for (std::size_t i = 0; i < a.returns.values().size(); ++i) {
    REQUIRE(a.returns.values()[i] == b.returns.values()[i]);
    REQUIRE(a.signal.values()[i] == b.signal.values()[i]);
  }
  CHECK(a.market_returns.values == b.market_returns.values);
  p.seed = 2;
  const auto c = generate_market(p);
  CHECK(c.returns.values()[5] != a.returns.values()[5]);
}

TEST_CASE("signal rows are permutations of the rank grid") {
  MarketModelParams p;
  p.n_stocks = 11;
  p.n_months = 5;
  const auto m = generate_market(p);
  for (std::size_t t = 0; t < m.signal.n_dates(); ++t) {
    std::vector<double> row(m.signal.row(t).begin(), m.signal.row(t).end());
    std::sort(row.begin(), row.end());
    for (std::size_t i = 0; i < row.size(); ++i) CHECK(row[i] == doctest::Approx(rank_score(i, 11)));
  }
  CHECK(rank_score(0, 11) == -0.5);
  CHECK(rank_score(10, 11) == 0.5);
}

TEST_CASE("static signal keeps the same ranks every month") {
  MarketModelParams p;
  p.n_stocks = 8;
  p.n_months = 4;
  p.static_signal = true;
  const auto m = generate_market(p);
  for (std::size_t t = 1; t < 4; ++t) {
    for (std::size_t s = 0; s < 8; ++s) CHECK(m.signal(t, s) == m.signal(0, s));
  }
}

TEST_CASE("null model has no mean return on the rank portfolio") {
  MarketModelParams p;
  p.n_stocks = 50;
  p.n_months = 300;
  p.b = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    p.seed = seed;
    const auto pnl = rank_pnl(generate_market(p));
    const double t = stats::mean(pnl) / stats::sample_sd(pnl) * std::sqrt(static_cast<double>(pnl.size()));
    CHECK(std::abs(t) < 3.0);
  }
}

TEST_CASE("rank portfolio Sharpe at N=1200 matches the closed form within 3 standard errors") {
  MarketModelParams p;
  p.n_stocks = 1200;
  p.n_months = 5000;
  p.b = 0.01;
  p.sigma_eps = 0.1;
  p.seed = 5;
  const auto pnl = rank_pnl(generate_market(p));
  const double sr = stats::mean(pnl) / stats::sample_sd(pnl);
  const double se = std::sqrt((1.0 + 0.5 * sr * sr) / static_cast<double>(pnl.size()));
  CHECK(analytic_sharpe(p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(sr - 1.0) < 3.0 * se);
}

TEST_CASE("closed-form Sharpe limits") {
  MarketModelParams p;
  p.b = 0.01;
  p.sigma_eta = 0.05;
  p.sigma_eps = 0.1;
  p.n_stocks = 1000000000;
  CHECK(std::abs(analytic_sharpe(p) / (p.b / p.sigma_eta) - 1.0) < 1e-6);
  // 12 sigma_eps^2 / (sigma_eta^2 N) = 0.01
  p.sigma_eps = 0.1;
  p.sigma_eta = 0.1;
  p.n_stocks = 1200;
  const double exact = analytic_sharpe(p);
  const double approx = analytic_sharpe_first_order(p);
  CHECK(std::abs(approx / exact - 1.0) < 1e-3);
  p.sigma_eta = 0.0;
  CHECK_THROWS(analytic_sharpe_first_order(p));
}

TEST_CASE("Sharpe of the rank portfolio increases with N when there is no factor noise") {
  std::vector<double> avg;
  for (std::size_t n : {50u, 100u, 200u, 400u, 800u}) {
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      MarketModelParams p;
      p.n_stocks = n;
      p.n_months = 400;
      p.seed = seed;
      const auto pnl = rank_pnl(generate_market(p));
      sum += stats::mean(pnl) / stats::sample_sd(pnl);
    }
    avg.push_back(sum / 20.0);
  }
  for (std::size_t i = 1; i < avg.size(); ++i) CHECK(avg[i] > avg[i - 1]);
}

TEST_CASE("overfit experiment with one pre-registered signal is unbiased") {
  MarketModelParams p;
  p.n_stocks = 100;
  p.n_months = 240;
  p.sigma_eps = 0.1;
  p.b = p.sigma_eps * std::sqrt(12.0 / static_cast<double>(p.n_stocks));
  REQUIRE(analytic_sharpe(p) == doctest::Approx(1.0));
  double sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    p.seed = seed;
    sum += overfit_experiment(p, 1, 0.5).discount;
  }
  const double mean = sum / 100.0;
  CHECK(mean > 0.7);
  CHECK(mean < 1.3);
}

TEST_CASE("overfit experiment rejects degenerate splits") {
  MarketModelParams p;
  p.n_stocks = 20;
  p.n_months = 40;
  CHECK_THROWS_AS(overfit_experiment(p, 2, 0.5), ConfigError);
  p.n_months = 100;
  CHECK_THROWS_AS(overfit_experiment(p, 0, 0.5), ConfigError);
  CHECK_THROWS_AS(overfit_experiment(p, 2, 1.0), ConfigError);
}

TEST_CASE("market parameter validation") {
  MarketModelParams p;
  p.sigma_eps = 0.0;
  CHECK_THROWS_AS(generate_market(p), ConfigError);
  p.sigma_eps = 0.1;
  p.n_stocks = 1;
  CHECK_THROWS_AS(generate_market(p), ConfigError);
}

TEST_CASE("synthetic zoo has consistent axes and metadata") {
  ZooParams z;
  z.n_stocks = 60;
  z.n_months = 360;
  z.n_factors = 4;
  const auto zoo = generate_zoo(z);
  CHECK(zoo.returns.n_stocks() == 60);
  CHECK(zoo.returns.n_dates() == 360);
  CHECK(zoo.volume.dates() == zoo.returns.dates());
  CHECK(zoo.marketcap.stocks() == zoo.returns.stocks());
  CHECK(zoo.market_returns.size() == 360);
  REQUIRE(zoo.factors.size() == 4);
  CHECK(zoo.planted_decay.size() == 4);
  for (const auto& f : zoo.factors) {
    CHECK_NOTHROW(f.validate());
    CHECK(f.in_sample_end < f.publication_date);
    CHECK(f.signal.dates() == zoo.returns.dates());
  }
  // Late listings leave leading gaps.
  CHECK(zoo.returns.count_missing() > 0);
  z.n_months = 100;
  CHECK_THROWS_AS(generate_zoo(z), ConfigError);
}

}  // TEST_SUITE
