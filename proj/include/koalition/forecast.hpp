#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "koalition/date.hpp"
#include "koalition/error.hpp"
#include "koalition/poe_engine.hpp"
#include "koalition/poll_ingest.hpp"
#include "koalition/posterior.hpp"

// Survey-based forecast: the nowcast is carried to election day with its
// data content discounted by horizon. Shocks that happen after as_of are not
// modelled and cannot be; a forecast band only widens the sampling
// uncertainty of the polls already published.

namespace koalition {

struct ForecastSpec {
  Date election_date;
  Date as_of;
  double tau = 60.0;  // days; horizon at which the data weight halves

  int horizon_days() const { return election_date - as_of; }

  void validate() const {
    if (!(tau > 0.0)) throw ConfigError("bad-config", "tau must be positive");
    if (horizon_days() < 0) {
      throw Error("past-election", "election date " + election_date.str() +
                                       " lies before as-of date " + as_of.str());
    }
  }
};

/// s(h) = 1 / (1 + h / tau): 1 at h = 0, 1/2 at h = tau, tending to 0.
inline double shrink_factor(double horizon_days, double tau) {
  return 1.0 / (1.0 + horizon_days / tau);
}

/// alpha'_k = prior_k + s(h) (alpha_k - prior_k). Total concentration falls
/// with the horizon, so every marginal variance grows with it.
inline DirichletPosterior inflate(const DirichletPosterior& posterior, const ForecastSpec& spec,
                                  std::span<const double> prior_alpha) {
  spec.validate();
  if (posterior.is_point_mass()) {
    throw Error("bad-posterior", "a point-mass posterior carries no data weight to inflate");
  }
  if (prior_alpha.size() != posterior.size()) throw Error("bad-prior", "prior size mismatch");
  const int h = spec.horizon_days();
  if (h == 0) return posterior;
  const double s = shrink_factor(h, spec.tau);
  std::vector<double> alpha(posterior.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const double data = posterior.alpha()[k] - prior_alpha[k];
    if (data < 0.0) throw Error("bad-prior", "posterior lies below the prior");
    alpha[k] = prior_alpha[k] + s * data;
  }
  DirichletPosterior out(posterior.ids(), std::move(alpha));
  out.source = posterior.source;
  return out;
}

struct FanPoint {
  Date date;
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
  bool forecast = false;  // date lies after as_of
};

/// Per-party bands over time. `parties` excludes the other bucket.
struct FanChart {
  std::vector<std::string> parties;
  std::vector<std::vector<FanPoint>> series;  // series[party][time]
  Date as_of;
  Date election_date;
  std::vector<Date> skipped;  // historical dates with an empty window
};

/// Grid from the first poll to election day in steps of `grid_days`. as_of
/// and election_date are always on the grid. Dates up to as_of use that
/// day's nowcast; later dates inflate the as_of nowcast by their distance.
inline FanChart fan_chart_data(std::span<const Poll> polls, const PartyRegistry& registry,
                               const ForecastSpec& spec, const ModelConfig& model, int grid_days,
                               std::size_t m, std::uint64_t seed, Parallelism par = {}) {
  spec.validate();
  if (polls.empty()) throw Error("no-polls", "fan chart needs at least one poll");
  if (grid_days < 1) throw ConfigError("bad-config", "grid_days must be >= 1");
  if (m == 0) throw Error("empty-request", "at least one draw is required");

  Date first = polls.front().publish_date;
  for (const auto& p : polls) first = std::min(first, p.publish_date);

  std::vector<Date> history;
  for (Date d = spec.as_of; d >= first; d = d - grid_days) history.push_back(d);
  std::reverse(history.begin(), history.end());
  std::vector<Date> future;
  for (Date d = spec.as_of + grid_days; d < spec.election_date; d = d + grid_days) {
    future.push_back(d);
  }
  if (spec.election_date > spec.as_of) future.push_back(spec.election_date);

  FanChart out;
  out.as_of = spec.as_of;
  out.election_date = spec.election_date;
  const std::size_t named = registry.size() - 1;
  for (std::size_t k = 0; k < named; ++k) out.parties.push_back(registry[k].id);
  out.series.resize(named);

  std::vector<double> column(m);
  auto add_point = [&](const DirichletPosterior& post, Date d, bool is_forecast) {
    const auto draws = sample_shares(post, m, seed, par);
    const auto mean = post.mean();
    for (std::size_t k = 0; k < named; ++k) {
      for (std::size_t i = 0; i < m; ++i) column[i] = draws.row(i)[k];
      std::sort(column.begin(), column.end());
      out.series[k].push_back(
          {d, mean[k], nearest_rank(column, 0.025), nearest_rank(column, 0.975), is_forecast});
    }
  };

  const auto prior = model.prior_for(registry.size());
  for (Date d : history) {
    auto post = nowcast_posterior(polls, registry, d, model);
    if (!post) {
      out.skipped.push_back(d);
      continue;
    }
    add_point(*post, d, false);
  }
  if (!future.empty()) {
    auto now = nowcast_posterior(polls, registry, spec.as_of, model);
    if (!now) {
      throw Error("no-polls", "no polls in the window ending " + spec.as_of.str());
    }
    for (Date d : future) {
      add_point(inflate(*now, {d, spec.as_of, spec.tau}, prior), d, true);
    }
  }
  if (out.series.empty() || out.series.front().empty()) {
    throw Error("no-data", "no fan chart date has polls in its window");
  }
  return out;
}

/// Nowcast at spec.as_of, inflated to election day, scored with estimate_poe.
inline PoEResult forecast_poe(std::span<const Poll> polls, const PartyRegistry& registry,
                              const ElectionRules& rules, const EventSpec& event,
                              const ForecastSpec& spec, const ModelConfig& model, std::size_t m,
                              std::uint64_t seed, Parallelism par = {}) {
  spec.validate();
  const auto pooled = pool(polls, spec.as_of, model.pooling);
  const auto prior = model.prior_for(registry.size());
  const auto now = posterior_from(pooled, registry, prior);
  return estimate_poe(inflate(now, spec, prior), rules, event, m, seed, par);
}

/// Seat-share distributions of forecasts made on each of `dates`, all
/// targeting `election_date`. Dates after election day are rejected.
inline Series<SeatShareDistribution> forecast_distribution_series(
    std::span<const Poll> polls, const PartyRegistry& registry, std::span<const Date> dates,
    Date election_date, double tau, const ElectionRules& rules,
    std::span<const std::string> coalition, const ModelConfig& model, std::size_t m,
    std::uint64_t seed, Parallelism par = {}) {
  detail::require_draws(m);
  const auto prior = model.prior_for(registry.size());
  return detail::run_series<SeatShareDistribution>(
      polls, registry, dates, model, [&](const DirichletPosterior& post, Date d) {
        const auto future = inflate(post, {election_date, d, tau}, prior);
        return seat_distribution(future, rules, coalition, m, seed, par);
      });
}

}  // namespace koalition
