#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "koalition/config.hpp"
#include "koalition/forecast.hpp"
#include "koalition/poe_engine.hpp"
#include "koalition/pooling.hpp"
#include "koalition/posterior.hpp"

// JSON reports. Objects are std::map-backed, so keys come out sorted; all
// fractions are rounded to six decimals.

namespace koalition {

using Json = nlohmann::json;

inline double round6(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no "-0.0"
}

inline Json to_json(const PoEResult& r) {
  return Json{{"probability", round6(r.probability)},
              {"mc_stderr", round6(r.mc_stderr)},
              {"subset_probability", round6(r.subset_probability)},
              {"hits", r.hits},
              {"m", r.m},
              {"seed", r.seed}};
}

inline Json to_json(const SeatAllocation& alloc, const PartyRegistry& registry) {
  Json seats = Json::object();
  for (std::size_t k = 0; k < registry.size(); ++k) seats[registry[k].id] = alloc.seats[k];
  return seats;
}

/// Body shared by the nowcast and forecast reports.
struct ReportInputs {
  const Config& config;
  const DirichletPosterior& posterior;
  const PooledSample& pooled;
  Date as_of;
  std::size_t m;
  std::uint64_t seed;
  Parallelism par;
};

inline Json build_report(const ReportInputs& in) {
  const auto& registry = in.config.registry;
  std::vector<EventSpec> events;
  for (const auto& c : in.config.coalitions) events.push_back(EventSpec::coalition(c.parties));
  for (std::size_t k = 0; k + 1 < registry.size(); ++k) {
    events.push_back(EventSpec::above_threshold(registry[k].id));
  }
  const auto results = estimate_poe(in.posterior, in.config.rules, events, in.m, in.seed, in.par);

  Json coalitions = Json::object();
  for (std::size_t j = 0; j < in.config.coalitions.size(); ++j) {
    Json entry = to_json(results[j]);
    entry["parties"] = in.config.coalitions[j].parties;
    coalitions[in.config.coalitions[j].name] = std::move(entry);
  }

  const auto draws = sample_shares(in.posterior, in.m, in.seed, in.par);
  const auto mean = in.posterior.mean();
  Json parties = Json::object();
  std::vector<double> column(in.m);
  for (std::size_t k = 0; k < registry.size(); ++k) {
    for (std::size_t i = 0; i < in.m; ++i) column[i] = draws.row(i)[k];
    std::sort(column.begin(), column.end());
    Json entry{{"mean", round6(mean[k])},
               {"ci95", {round6(nearest_rank(column, 0.025)), round6(nearest_rank(column, 0.975))}}};
    if (k + 1 < registry.size()) {
      entry["p_above_threshold"] = round6(results[in.config.coalitions.size() + k].probability);
    }
    parties[registry[k].id] = std::move(entry);
  }

  Json used = Json::array();
  for (const auto& p : in.pooled.polls_used) {
    used.push_back({{"pollster", p.pollster}, {"date", p.publish_date.str()}});
  }
  const std::size_t hung = results.empty() ? 0 : results.front().hung;
  return Json{
      {"as_of", in.as_of.str()},
      {"draws", in.m},
      {"seed", in.seed},
      {"window_days", in.pooled.window_days},
      {"dependence_factor", round6(in.config.model.pooling.dependence_factor)},
      {"rules",
       {{"threshold", round6(in.config.rules.threshold)},
        {"house_size", in.config.rules.house_size},
        {"method", std::string(to_string(in.config.rules.method))}}},
      {"coalitions", std::move(coalitions)},
      {"parties", std::move(parties)},
      {"diagnostics",
       {{"polls_used", std::move(used)},
        {"n_eff", in.pooled.n_eff},
        {"hung_fraction", round6(static_cast<double>(hung) / static_cast<double>(in.m))}}}};
}

}  // namespace koalition
