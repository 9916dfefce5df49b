#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "zoo/date.hpp"
#include "zoo/factor_spec.hpp"
#include "zoo/panel.hpp"

namespace zoo {

// One-factor market
//   r_{t+1} = (b + eta_{t+1}) s_t + beta R^m_{t+1} + eps_{t+1}
// with s_t cross-sectional ranks in [-0.5, 0.5]. All vols are monthly.
struct MarketModelParams {
  std::size_t n_stocks = 500;
  std::size_t n_months = 600;
  double b = 0.01;
  double sigma_eta = 0.0;
  double sigma_eps = 0.1;
  double beta_mean = 1.0;
  double beta_sd = 0.2;
  double market_vol = 0.04;
  std::uint64_t seed = 1;
  // Freeze the cross-sectional ranks instead of redrawing them each month.
  bool static_signal = false;
  Date start{1970, 1, 31};

  void validate() const;
};

struct SyntheticMarket {
  Panel returns;
  DatedSeries market_returns;
  Panel signal;
  std::vector<double> betas;
  MarketModelParams params;
};

SyntheticMarket generate_market(const MarketModelParams& params);

// Monthly Sharpe of the rank-weighted portfolio s_t' r_{t+1}:
//   (b / sigma_eta) / sqrt(1 + 12 sigma_eps^2 / (sigma_eta^2 N)),
// or (b / sigma_eps) sqrt(N / 12) when sigma_eta = 0.
double analytic_sharpe(const MarketModelParams& params);
// First-order expansion SR_inf (1 - 6 sigma_eps^2 / (sigma_eta^2 N)). Requires sigma_eta > 0.
double analytic_sharpe_first_order(const MarketModelParams& params);

// Maps rank k in [0, n) onto the uniform grid in [-0.5, 0.5].
inline double rank_score(std::size_t rank, std::size_t n) {
  return n > 1 ? static_cast<double>(rank) / static_cast<double>(n - 1) - 0.5 : 0.0;
}

struct OverfitOutcome {
  double sr_is = 0.0;   // annualized
  double sr_oos = 0.0;  // annualized
  double discount = 0.0;
  std::size_t selected = 0;  // 0 = the market's own signal
};

// Best-of-K selection: candidate 0 is the market's signal, candidates
// 1..K-1 are independent random rank signals. The candidate with the best
// in-sample Sharpe over the first `split` of the months is reported with its
// held-out Sharpe.
OverfitOutcome overfit_experiment(const MarketModelParams& params, std::size_t k_signals, double split);

// Multi-factor market used for end-to-end pipeline runs. Each factor has a
// persistent characteristic, a pre-publication payoff, and a post-publication
// payoff that shrinks with the publication year.
struct ZooParams {
  std::size_t n_stocks = 500;
  std::size_t n_months = 600;
  std::size_t n_factors = 20;
  double sigma_eta = 0.02;
  double sigma_eps = 0.08;
  double beta_mean = 1.0;
  double beta_sd = 0.2;
  double market_vol = 0.04;
  // Range of annualized size-free Sharpe ratios drawn per factor.
  double sr_min = 0.4;
  double sr_max = 1.4;
  // Post-publication payoff multiplier is 1 + year_slope * (year - 1990) plus noise.
  double year_slope = -0.04;
  double late_listing_share = 0.1;
  std::uint64_t seed = 1;
  Date start{1970, 1, 31};

  void validate() const;
};

struct SyntheticZoo {
  Panel returns;
  DatedSeries market_returns;
  Panel volume;
  Panel marketcap;
  std::vector<FactorSpec> factors;
  // Planted post-publication payoff multipliers, one per factor.
  std::vector<double> planted_decay;
};

SyntheticZoo generate_zoo(const ZooParams& params);

}  // namespace zoo
