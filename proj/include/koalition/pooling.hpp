#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "koalition/date.hpp"
#include "koalition/error.hpp"
#include "koalition/poll_ingest.hpp"

namespace koalition {

struct PoolingConfig {
  int window_days = 14;
  /// Multiplies the pooled sample size. 1 treats pollsters as independent;
  /// smaller values discount for between-pollster dependence.
  double dependence_factor = 1.0;

  void validate() const {
    if (window_days < 1) throw ConfigError("bad-config", "window_days must be >= 1");
    if (!(dependence_factor > 0.0 && dependence_factor <= 1.0)) {
      throw ConfigError("bad-config", "dependence_factor must lie in (0, 1]");
    }
  }
};

struct PollRef {
  std::string pollster;
  Date publish_date;

  friend bool operator==(const PollRef&, const PollRef&) = default;
};

struct PooledSample {
  Date as_of;
  int window_days = 0;
  std::vector<long long> counts;  // registry order, other bucket last
  long long n_eff = 0;
  std::vector<PollRef> polls_used;  // sorted by pollster id
};

/// Largest-remainder rounding: integers summing to `total`, each the floor of
/// its quota plus at most one. Remainder ties go to the lower index.
inline std::vector<long long> largest_remainder(std::span<const double> quotas, long long total) {
  std::vector<long long> out(quotas.size());
  std::vector<double> rem(quotas.size());
  long long assigned = 0;
  for (std::size_t k = 0; k < quotas.size(); ++k) {
    const double q = std::max(0.0, quotas[k]);
    out[k] = static_cast<long long>(std::floor(q));
    rem[k] = q - static_cast<double>(out[k]);
    assigned += out[k];
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  long long left = total - assigned;
  // Floating noise can push Σfloor one above total; take it back from the
  // smallest remainders.
  for (std::size_t i = order.size(); left < 0 && i-- > 0;) {
    if (out[order[i]] > 0) {
      --out[order[i]];
      ++left;
    }
  }
  for (std::size_t i = 0; left > 0; i = (i + 1) % order.size()) {
    ++out[order[i]];
    --left;
  }
  return out;
}

/// Pools the newest in-window poll of every pollster into integer counts.
/// Result does not depend on the order of `polls`.
inline PooledSample pool(std::span<const Poll> polls, Date as_of, const PoolingConfig& config) {
  config.validate();
  const Date window_start = as_of - config.window_days;  // exclusive

  // Per pollster: newest date, then larger n, then lexicographically smaller
  // share vector, so duplicates resolve independently of input order.
  std::map<std::string, const Poll*> newest;
  for (const auto& poll : polls) {
    if (!(poll.publish_date > window_start && poll.publish_date <= as_of)) continue;
    auto [it, inserted] = newest.try_emplace(poll.pollster, &poll);
    if (inserted) continue;
    const Poll& cur = *it->second;
    bool better = false;
    if (poll.publish_date != cur.publish_date) {
      better = poll.publish_date > cur.publish_date;
    } else if (poll.sample_size != cur.sample_size) {
      better = poll.sample_size > cur.sample_size;
    } else {
      better = poll.shares < cur.shares;
    }
    if (better) it->second = &poll;
  }
  if (newest.empty()) {
    throw Error("no-polls", fmt::format("no polls in the {} days up to {}", config.window_days,
                                        as_of.str()));
  }

  PooledSample out;
  out.as_of = as_of;
  out.window_days = config.window_days;
  const std::size_t parties = newest.begin()->second->shares.size();
  out.counts.assign(parties, 0);
  long long raw_total = 0;
  std::vector<double> quotas(parties);
  for (const auto& [pollster, poll] : newest) {
    if (poll->shares.size() != parties) {
      throw DataError("shape", "polls disagree on the number of parties");
    }
    for (std::size_t k = 0; k < parties; ++k) {
      quotas[k] = static_cast<double>(poll->sample_size) * poll->shares[k];
    }
    auto counts = largest_remainder(quotas, poll->sample_size);
    for (std::size_t k = 0; k < parties; ++k) out.counts[k] += counts[k];
    raw_total += poll->sample_size;
    out.polls_used.push_back({pollster, poll->publish_date});
  }

  if (config.dependence_factor != 1.0) {
    const long long target =
        std::llround(config.dependence_factor * static_cast<double>(raw_total));
    if (target < 1) {
      throw Error("degenerate-sample", "dependence_factor leaves no effective sample");
    }
    for (std::size_t k = 0; k < parties; ++k) {
      quotas[k] = config.dependence_factor * static_cast<double>(out.counts[k]);
    }
    out.counts = largest_remainder(quotas, target);
    out.n_eff = target;
  } else {
    out.n_eff = raw_total;
  }
  return out;
}

}  // namespace koalition
