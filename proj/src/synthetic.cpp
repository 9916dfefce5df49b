#include "zoo/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "zoo/errors.hpp"
#include "zoo/random.hpp"
#include "zoo/stats.hpp"

namespace zoo {

namespace {

std::vector<Date> monthly_dates(const Date& start, std::size_t n) {
  std::vector<Date> dates;
  dates.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    dates.push_back(Date::month_end(start.month_index() + static_cast<std::int64_t>(t)));
  }
  return dates;
}

// Writes rank scores of a random permutation into `scores`.
void random_ranks(std::mt19937_64& rng, std::vector<std::size_t>& perm, std::span<double> scores) {
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t i = 0; i < perm.size(); ++i) scores[perm[i]] = rank_score(i, perm.size());
}

}  // namespace

void MarketModelParams::validate() const {
  if (n_stocks < 2) throw ConfigError("n_stocks must be at least 2");
  if (n_months < 2) throw ConfigError("n_months must be at least 2");
  if (!(sigma_eps > 0.0)) throw ConfigError("sigma_eps must be positive");
  if (!(sigma_eta >= 0.0)) throw ConfigError("sigma_eta must be nonnegative");
  if (!(market_vol > 0.0)) throw ConfigError("market_vol must be positive");
  if (!(beta_sd >= 0.0)) throw ConfigError("beta_sd must be nonnegative");
}

SyntheticMarket generate_market(const MarketModelParams& params) {
  params.validate();
  const std::size_t n = params.n_stocks;
  const std::size_t months = params.n_months;
  auto rng = make_rng(params.seed);
  std::normal_distribution<double> z(0.0, 1.0);

  std::vector<double> betas(n);
  for (auto& b : betas) b = params.beta_mean + params.beta_sd * z(rng);

  const auto dates = monthly_dates(params.start, months);
  std::vector<std::string> stocks(n);
  for (std::size_t s = 0; s < n; ++s) stocks[s] = "S" + std::to_string(s + 1);

  Panel returns(dates, stocks);
  Panel signal(dates, stocks);
  DatedSeries market{dates, std::vector<double>(months)};
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  for (std::size_t t = 0; t < months; ++t) {
    const double rm = params.market_vol * z(rng);
    const double eta = params.sigma_eta * z(rng);
    market.values[t] = rm;
    auto r = returns.row(t);
    for (std::size_t s = 0; s < n; ++s) {
      double v = betas[s] * rm + params.sigma_eps * z(rng);
      if (t > 0) v += (params.b + eta) * signal(t - 1, s);
      r[s] = v;
    }
    if (t == 0 || !params.static_signal) {
      random_ranks(rng, perm, signal.row(t));
    } else {
      auto prev = signal.row(t - 1);
      std::copy(prev.begin(), prev.end(), signal.row(t).begin());
    }
  }
  return SyntheticMarket{std::move(returns), std::move(market), std::move(signal), std::move(betas), params};
}

double analytic_sharpe(const MarketModelParams& params) {
  const double n = static_cast<double>(params.n_stocks);
  if (params.sigma_eta == 0.0) return params.b / params.sigma_eps * std::sqrt(n / 12.0);
  const double ratio = params.sigma_eps * params.sigma_eps / (params.sigma_eta * params.sigma_eta * n);
  return params.b / params.sigma_eta / std::sqrt(1.0 + 12.0 * ratio);
}

double analytic_sharpe_first_order(const MarketModelParams& params) {
  if (!(params.sigma_eta > 0.0)) throw ConfigError("first-order Sharpe needs sigma_eta > 0");
  const double n = static_cast<double>(params.n_stocks);
  const double ratio = params.sigma_eps * params.sigma_eps / (params.sigma_eta * params.sigma_eta * n);
  return params.b / params.sigma_eta * (1.0 - 6.0 * ratio);
}

OverfitOutcome overfit_experiment(const MarketModelParams& params, std::size_t k_signals, double split) {
  if (k_signals < 1) throw ConfigError("overfit experiment needs at least one signal");
  if (!(split > 0.0 && split < 1.0)) throw ConfigError("split must lie in (0, 1)");
  params.validate();
  const std::size_t pnl_months = params.n_months - 1;
  const auto n_is = static_cast<std::size_t>(std::floor(split * static_cast<double>(pnl_months)));
  if (n_is < 24 || pnl_months - n_is < 24) {
    throw ConfigError("split leaves fewer than 24 months on one side");
  }

  const auto market = generate_market(params);
  const std::size_t n = params.n_stocks;
  auto rng = make_rng(params.seed, 1);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<double> scores(n);
  std::vector<double> pnl(pnl_months);

  OverfitOutcome best;
  best.sr_is = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k_signals; ++j) {
    for (std::size_t t = 0; t < pnl_months; ++t) {
      std::span<const double> s = market.signal.row(t);
      if (j > 0) {
        random_ranks(rng, perm, scores);
        s = scores;
      }
      auto r = market.returns.row(t + 1);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += s[i] * r[i];
      pnl[t] = acc;
    }
    const std::span<const double> all(pnl);
    const double sr_is = stats::annualized_sharpe(all.first(n_is));
    if (sr_is > best.sr_is) {
      best.sr_is = sr_is;
      best.sr_oos = stats::annualized_sharpe(all.subspan(n_is));
      best.selected = j;
    }
  }
  if (best.sr_is == 0.0) throw DataError("selected in-sample Sharpe is zero");
  best.discount = best.sr_oos / best.sr_is;
  return best;
}

void ZooParams::validate() const {
  if (n_stocks < 20) throw ConfigError("zoo needs at least 20 stocks");
  if (n_months < 360) throw ConfigError("zoo needs at least 360 months");
  if (n_factors < 1) throw ConfigError("zoo needs at least one factor");
  if (!(sigma_eta > 0.0) || !(sigma_eps > 0.0) || !(market_vol > 0.0)) {
    throw ConfigError("zoo volatilities must be positive");
  }
  if (!(sr_min <= sr_max)) throw ConfigError("sr_min must not exceed sr_max");
  if (!(late_listing_share >= 0.0 && late_listing_share < 1.0)) {
    throw ConfigError("late_listing_share must lie in [0, 1)");
  }
}

SyntheticZoo generate_zoo(const ZooParams& params) {
  params.validate();
  const std::size_t n = params.n_stocks;
  const std::size_t months = params.n_months;
  const std::size_t k = params.n_factors;
  auto rng = make_rng(params.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto uniform_int = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };

  const auto dates = monthly_dates(params.start, months);
  std::vector<std::string> stocks(n);
  for (std::size_t s = 0; s < n; ++s) stocks[s] = "S" + std::to_string(s + 1);

  std::vector<double> betas(n), log_cap0(n), turnover(n);
  std::vector<std::size_t> listing(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    betas[s] = params.beta_mean + params.beta_sd * z(rng);
    log_cap0[s] = std::log(1000.0) + 1.5 * z(rng);
    turnover[s] = std::exp(std::log(0.05) + 0.5 * z(rng));
    if (u(rng) < params.late_listing_share) listing[s] = uniform_int(1, months / 2);
  }

  struct FactorDraw {
    double persistence;
    double payoff;
    double decay;
    std::size_t pub;
    std::size_t is_start;
    std::size_t is_end;
    int n_fields;
    int n_operations;
    double q;
  };
  const double qs[] = {0.10, 0.10, 0.10, 0.20, 0.30};
  std::vector<FactorDraw> draws(k);
  for (auto& f : draws) {
    f.persistence = 0.98 * u(rng);
    const double sr = params.sr_min + (params.sr_max - params.sr_min) * u(rng);
    f.payoff = sr / std::sqrt(12.0) * params.sigma_eta;
    f.pub = uniform_int(180, months - 120);
    f.is_start = 36 + uniform_int(0, 60);
    f.is_end = f.pub - uniform_int(6, 24);
    const double year = dates[f.pub].fractional_year();
    f.decay = std::clamp(1.0 + params.year_slope * (year - 1990.0) + 0.15 * z(rng), -0.5, 1.5);
    f.n_fields = static_cast<int>(uniform_int(0, 5));
    f.n_operations = static_cast<int>(uniform_int(0, 5));
    f.q = qs[uniform_int(0, 4)];
  }

  Panel returns(dates, stocks);
  Panel volume(dates, stocks);
  Panel marketcap(dates, stocks);
  std::vector<Panel> signals(k, Panel(dates, stocks));
  DatedSeries market{dates, std::vector<double>(months)};

  std::vector<std::vector<double>> latent(k, std::vector<double>(n));
  for (auto& l : latent) {
    for (auto& v : l) v = z(rng);
  }
  std::vector<double> eta(k);
  std::vector<std::size_t> order;
  order.reserve(n);

  for (std::size_t t = 0; t < months; ++t) {
    const double rm = params.market_vol * z(rng);
    market.values[t] = rm;
    for (auto& e : eta) e = params.sigma_eta * z(rng);
    for (std::size_t s = 0; s < n; ++s) {
      const double eps = params.sigma_eps * z(rng);
      const double vol_noise = z(rng);
      if (t < listing[s]) continue;
      double r = betas[s] * rm + eps;
      if (t > 0) {
        for (std::size_t j = 0; j < k; ++j) {
          const double prev = signals[j](t - 1, s);
          if (is_missing(prev)) continue;
          const double payoff = t > draws[j].pub ? draws[j].payoff * draws[j].decay : draws[j].payoff;
          r += (payoff + eta[j]) * prev;
        }
      }
      returns(t, s) = r;
      const double cap = t == listing[s] ? std::exp(log_cap0[s])
                                         : std::max(marketcap(t - 1, s) * (1.0 + r), 1e-3);
      marketcap(t, s) = cap;
      volume(t, s) = cap * turnover[s] * std::exp(0.3 * vol_noise);
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double phi = draws[j].persistence;
      const double innov = std::sqrt(1.0 - phi * phi);
      order.clear();
      for (std::size_t s = 0; s < n; ++s) {
        latent[j][s] = phi * latent[j][s] + innov * z(rng);
        if (t >= listing[s]) order.push_back(s);
      }
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return latent[j][a] < latent[j][b]; });
      for (std::size_t i = 0; i < order.size(); ++i) signals[j](t, order[i]) = rank_score(i, order.size());
    }
  }

  SyntheticZoo zoo{std::move(returns), std::move(market), std::move(volume), std::move(marketcap), {}, {}};
  for (std::size_t j = 0; j < k; ++j) {
    const auto& f = draws[j];
    std::string name = "F" + std::string(j + 1 < 10 ? "0" : "") + std::to_string(j + 1);
    zoo.factors.push_back(FactorSpec{std::move(name), std::move(signals[j]), dates[f.pub],
                                     dates[f.is_start], dates[f.is_end], f.n_fields, f.n_operations, f.q});
    zoo.planted_decay.push_back(f.decay);
  }
  return zoo;
}

}  // namespace zoo
