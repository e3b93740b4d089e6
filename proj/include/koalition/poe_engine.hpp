#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "koalition/date.hpp"
#include "koalition/electoral.hpp"
#include "koalition/error.hpp"
#include "koalition/parallel.hpp"
#include "koalition/poll_ingest.hpp"
#include "koalition/pooling.hpp"
#include "koalition/posterior.hpp"

namespace koalition {

inline constexpr std::size_t kMinDraws = 1000;

enum class EventKind { coalition_majority, party_above_threshold, strongest_party };

/// An event evaluated on one simulated election. `negated` selects the
/// complement, so E and not-E can be scored on the same draws.
struct EventSpec {
  EventKind kind = EventKind::coalition_majority;
  std::vector<std::string> parties;
  bool negated = false;

  static EventSpec coalition(std::vector<std::string> members) {
    return {EventKind::coalition_majority, std::move(members), false};
  }
  static EventSpec above_threshold(std::string party) {
    return {EventKind::party_above_threshold, {std::move(party)}, false};
  }
  /// Largest vote share among the named parties (other bucket excluded).
  static EventSpec strongest(std::string party) {
    return {EventKind::strongest_party, {std::move(party)}, false};
  }

  EventSpec complement() const {
    EventSpec e = *this;
    e.negated = !e.negated;
    return e;
  }
};

struct PoEResult {
  double probability = 0.0;
  double mc_stderr = 0.0;
  /// Share of draws in which a proper subset of the coalition already has a
  /// majority. Such draws are a subset of the full-coalition draws since
  /// seats are non-negative, so "subset majority" and "subset majority and
  /// coalition majority" are the same event.
  double subset_probability = 0.0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::size_t hits = 0;
  std::size_t subset_hits = 0;
  std::size_t hung = 0;

  friend bool operator==(const PoEResult&, const PoEResult&) = default;
};

inline double mc_stderr(double p, std::size_t m) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(m));
}

inline PoEResult make_poe_result(std::size_t hits, std::size_t subset_hits, std::size_t hung,
                                 std::size_t m, std::uint64_t seed) {
  PoEResult r;
  r.m = m;
  r.seed = seed;
  r.hits = hits;
  r.subset_hits = subset_hits;
  r.hung = hung;
  r.probability = static_cast<double>(hits) / static_cast<double>(m);
  r.subset_probability = static_cast<double>(subset_hits) / static_cast<double>(m);
  r.mc_stderr = mc_stderr(r.probability, m);
  return r;
}

namespace detail {

struct CompiledEvent {
  EventKind kind;
  std::vector<std::size_t> members;
  bool negated;
};

inline std::size_t index_in(const std::vector<std::string>& ids, const std::string& id) {
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] == id) return k;
  }
  throw Error("unknown-party", "unknown party id '" + id + "'");
}

inline CompiledEvent compile(const EventSpec& e, const std::vector<std::string>& ids) {
  if (e.parties.empty()) throw Error("bad-event", "event names no party");
  if (e.kind != EventKind::coalition_majority && e.parties.size() != 1) {
    throw Error("bad-event", "threshold and strongest-party events take exactly one party");
  }
  CompiledEvent c{e.kind, {}, e.negated};
  for (const auto& id : e.parties) c.members.push_back(index_in(ids, id));
  return c;
}

/// One simulated election: shares -> threshold -> seats. Owns its scratch
/// buffers; one instance per worker.
class ElectionSimulator {
 public:
  ElectionSimulator(const ShareSampler& sampler, const ElectionRules& rules,
                    std::size_t other_index)
      : sampler_(sampler), rules_(rules), other_(other_index), shares_(sampler.size()),
        normalized_(sampler.size()), eligible_(sampler.size()), alloc_{std::vector<int>(sampler.size()),
                                          std::vector<char>(sampler.size())} {}

  void run(std::uint64_t index) {
    sampler_.draw(index, shares_);
    const double total = mark_eligible(shares_, other_, rules_.threshold, eligible_);
    hung_ = !(total > 0.0);
    if (hung_) std::fill(eligible_.begin(), eligible_.end(), 0);
    for (std::size_t k = 0; k < shares_.size(); ++k) {
      normalized_[k] = eligible_[k] ? shares_[k] / total : 0.0;
    }
    alloc_.eligible = eligible_;
    highest_averages(normalized_, eligible_, rules_.house_size, rules_.method, alloc_.seats);
  }

  bool hung() const { return hung_; }
  const std::vector<double>& shares() const { return shares_; }
  const SeatAllocation& allocation() const { return alloc_; }

  bool holds(const CompiledEvent& e) const {
    bool value = false;
    switch (e.kind) {
      case EventKind::coalition_majority:
        value = !hung_ && has_majority(coalition_seats(alloc_, e.members), rules_);
        break;
      case EventKind::party_above_threshold:
        value = eligible_[e.members.front()] != 0;
        break;
      case EventKind::strongest_party: {
        std::size_t best = 0;
        for (std::size_t k = 1; k < shares_.size(); ++k) {
          if (k != other_ && (best == other_ || shares_[k] > shares_[best])) best = k;
        }
        value = best == e.members.front() && best != other_;
        break;
      }
    }
    return value != e.negated;
  }

  bool subset_holds(const CompiledEvent& e) const {
    if (e.kind != EventKind::coalition_majority || e.negated || hung_) return false;
    return subset_sufficient(alloc_, e.members, rules_);
  }

 private:
  const ShareSampler& sampler_;
  const ElectionRules& rules_;
  std::size_t other_;
  std::vector<double> shares_;
  std::vector<double> normalized_;
  std::vector<char> eligible_;
  SeatAllocation alloc_;
  bool hung_ = false;
};

inline void require_draws(std::size_t m) {
  if (m < kMinDraws) {
    throw Error("insufficient-draws",
                "at least " + std::to_string(kMinDraws) + " draws are required");
  }
}

}  // namespace detail

/// Scores every event on the same m draws. Deterministic in (seed, m).
inline std::vector<PoEResult> estimate_poe(const DirichletPosterior& posterior,
                                           const ElectionRules& rules,
                                           std::span<const EventSpec> events, std::size_t m,
                                           std::uint64_t seed, Parallelism par = {}) {
  detail::require_draws(m);
  rules.validate();
  std::vector<detail::CompiledEvent> compiled;
  for (const auto& e : events) compiled.push_back(detail::compile(e, posterior.ids()));

  const std::size_t n_events = compiled.size();
  // Per chunk: hits, subset hits per event, then hung count.
  std::vector<std::size_t> tallies(chunk_count(m) * (2 * n_events + 1), 0);
  const ShareSampler sampler(posterior, seed);
  parallel_chunks(m, par, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    detail::ElectionSimulator sim(sampler, rules, posterior.other_index());
    std::size_t* t = tallies.data() + chunk * (2 * n_events + 1);
    for (std::size_t i = begin; i < end; ++i) {
      sim.run(i);
      for (std::size_t j = 0; j < n_events; ++j) {
        if (sim.holds(compiled[j])) ++t[j];
        if (sim.subset_holds(compiled[j])) ++t[n_events + j];
      }
      if (sim.hung()) ++t[2 * n_events];
    }
  });

  std::vector<std::size_t> hits(n_events, 0);
  std::vector<std::size_t> subset(n_events, 0);
  std::size_t hung = 0;
  for (std::size_t c = 0; c < chunk_count(m); ++c) {
    const std::size_t* t = tallies.data() + c * (2 * n_events + 1);
    for (std::size_t j = 0; j < n_events; ++j) {
      hits[j] += t[j];
      subset[j] += t[n_events + j];
    }
    hung += t[2 * n_events];
  }
  std::vector<PoEResult> out;
  out.reserve(n_events);
  for (std::size_t j = 0; j < n_events; ++j) {
    out.push_back(make_poe_result(hits[j], subset[j], hung, m, seed));
  }
  return out;
}

inline PoEResult estimate_poe(const DirichletPosterior& posterior, const ElectionRules& rules,
                              const EventSpec& event, std::size_t m, std::uint64_t seed,
                              Parallelism par = {}) {
  return estimate_poe(posterior, rules, std::span<const EventSpec>(&event, 1), m, seed, par)
      .front();
}

// ---------------------------------------------------------------------------
// Seat-share distributions

/// Nearest-rank quantile of sorted data: the ceil(p n)-th smallest value.
inline double nearest_rank(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error("empty-request", "quantile of empty data");
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

struct DensityGrid {
  std::vector<double> x;
  std::vector<double> height;
  double bandwidth = 0.0;
  /// Width of the lattice cell each value stands for (0 for continuous data).
  double bin_width = 0.0;
  std::vector<std::pair<double, double>> atoms;  // (value, count), merged equal values
  double norm = 0.0;  // 1 / sample size

  /// Density at any x in [0, 1]: the estimator itself when the atoms are
  /// known, linear interpolation of the grid otherwise.
  double at(double v) const {
    if (!atoms.empty() && bandwidth > 0.0) {
      double acc = 0.0;
      for (const auto& [a, w] : atoms) {
        acc += w * (kernel(v - a) + kernel(v + a) + kernel(v - (2.0 - a)));
      }
      return acc * norm;
    }
    if (x.size() < 2) return 0.0;
    if (v <= x.front()) return height.front();
    if (v >= x.back()) return height.back();
    const auto it = std::upper_bound(x.begin(), x.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double t = (v - x[i]) / (x[i + 1] - x[i]);
    return height[i] * (1.0 - t) + height[i + 1] * t;
  }

 private:
  /// Gaussian, or a Gaussian convolved with the uniform cell of width
  /// bin_width centred on the atom.
  double kernel(double d) const {
    const double h = bandwidth;
    if (bin_width <= 0.0) {
      const double z = d / h;
      return z * z > 80.0 ? 0.0 : std::exp(-0.5 * z * z) / (h * std::sqrt(2.0 * std::numbers::pi));
    }
    const double half = 0.5 * bin_width;
    if (std::abs(d) - half > 13.0 * h) return 0.0;
    const double s = h * std::numbers::sqrt2;
    return 0.5 * (std::erfc((d - half) / s) - std::erfc((d + half) / s)) / bin_width;
  }
};

/// Kernel density on [0, 1], reflected at both boundaries so no mass leaks
/// outside the interval. The kernel is Gaussian with Silverman's
/// rule-of-thumb bandwidth; lattice data (bin_width > 0, e.g. seat shares in
/// steps of 1 / house_size) spreads each value uniformly over its cell
/// before smoothing, so lattice spacing never shows up as spikes and mass
/// stays on the correct side of cell boundaries.
inline DensityGrid reflected_kde(std::span<const double> values, std::size_t grid_points = 512,
                                 double bin_width = 0.0) {
  if (values.empty()) throw Error("empty-request", "density of empty data");
  if (grid_points < 2) throw Error("bad-grid", "density grid needs at least two points");
  if (!(bin_width >= 0.0)) throw Error("bad-grid", "bin width must be non-negative");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());

  double mean = 0.0;
  for (double v : sorted) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = sorted.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const double iqr = nearest_rank(sorted, 0.75) - nearest_rank(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  const double step = 1.0 / static_cast<double>(grid_points - 1);
  // Degenerate samples still get a visible bump.
  const double floor = bin_width > 0.0 ? 0.25 * bin_width : step;
  const double h = std::max(0.9 * spread * std::pow(n, -0.2), floor);

  DensityGrid out;
  out.bandwidth = h;
  out.bin_width = bin_width;
  out.norm = 1.0 / n;
  for (double v : sorted) {
    if (!out.atoms.empty() && out.atoms.back().first == v) {
      out.atoms.back().second += 1.0;
    } else {
      out.atoms.emplace_back(v, 1.0);
    }
  }
  out.x.resize(grid_points);
  out.height.resize(grid_points);
  for (std::size_t g = 0; g < grid_points; ++g) {
    out.x[g] = static_cast<double>(g) * step;
    out.height[g] = out.at(out.x[g]);
  }
  return out;
}

struct SeatShareDistribution {
  std::vector<double> draws;  // joint seat share per draw, draw order
  DensityGrid density;
  std::pair<double, double> ci95{0.0, 0.0};
  double majority_mass = 0.0;
  /// Midway between the largest non-majority and the smallest majority seat
  /// share, i.e. (floor(house / 2) + 0.5) / house.
  double majority_cutoff = 0.5;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::size_t hung = 0;
};

/// Joint seat share of `coalition` (seats / house size, 0 when hung) per draw.
inline SeatShareDistribution seat_distribution(const DirichletPosterior& posterior,
                                               const ElectionRules& rules,
                                               std::span<const std::string> coalition,
                                               std::size_t m, std::uint64_t seed,
                                               Parallelism par = {}) {
  detail::require_draws(m);
  rules.validate();
  const auto event = detail::compile(
      EventSpec::coalition(std::vector<std::string>(coalition.begin(), coalition.end())),
      posterior.ids());

  SeatShareDistribution out;
  out.m = m;
  out.seed = seed;
  out.draws.resize(m);
  std::vector<std::size_t> majority(chunk_count(m), 0);
  std::vector<std::size_t> hung(chunk_count(m), 0);
  const ShareSampler sampler(posterior, seed);
  parallel_chunks(m, par, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    detail::ElectionSimulator sim(sampler, rules, posterior.other_index());
    for (std::size_t i = begin; i < end; ++i) {
      sim.run(i);
      if (sim.hung()) {
        out.draws[i] = 0.0;
        ++hung[chunk];
        continue;
      }
      const int seats = coalition_seats(sim.allocation(), event.members);
      out.draws[i] = static_cast<double>(seats) / static_cast<double>(rules.house_size);
      if (has_majority(seats, rules)) ++majority[chunk];
    }
  });
  std::size_t maj = 0;
  for (auto c : majority) maj += c;
  for (auto c : hung) out.hung += c;
  out.majority_mass = static_cast<double>(maj) / static_cast<double>(m);
  out.majority_cutoff = (rules.house_size / 2 + 0.5) / static_cast<double>(rules.house_size);

  std::vector<double> sorted = out.draws;
  std::sort(sorted.begin(), sorted.end());
  out.ci95 = {nearest_rank(sorted, 0.025), nearest_rank(sorted, 0.975)};
  out.density = reflected_kde(sorted, 512, 1.0 / static_cast<double>(rules.house_size));
  return out;
}

/// The first k simulated parliaments of the draw stream for `seed`.
inline std::vector<SeatAllocation> sample_parliaments(const DirichletPosterior& posterior,
                                                      const ElectionRules& rules, std::size_t k,
                                                      std::uint64_t seed) {
  if (k < 1) throw Error("empty-request", "at least one parliament is required");
  rules.validate();
  const ShareSampler sampler(posterior, seed);
  detail::ElectionSimulator sim(sampler, rules, posterior.other_index());
  std::vector<SeatAllocation> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    sim.run(i);
    out.push_back(sim.allocation());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time series

/// Pooling and prior settings shared by every date of a series.
struct ModelConfig {
  PoolingConfig pooling;
  /// Per-party prior concentrations; empty means symmetric 0.5.
  std::vector<double> prior_alpha;

  std::vector<double> prior_for(std::size_t parties) const {
    if (prior_alpha.empty()) return symmetric_prior(parties);
    if (prior_alpha.size() != parties) throw Error("bad-prior", "prior size mismatch");
    return prior_alpha;
  }
};

template <typename T>
struct Series {
  std::vector<std::pair<Date, T>> points;
  std::vector<Date> skipped;  // dates with no poll inside the window
};

/// Nowcast posterior as of `date`, or nullopt when the window is empty.
inline std::optional<DirichletPosterior> nowcast_posterior(std::span<const Poll> polls,
                                                           const PartyRegistry& registry,
                                                           Date as_of,
                                                           const ModelConfig& model) {
  try {
    const auto pooled = pool(polls, as_of, model.pooling);
    const auto prior = model.prior_for(registry.size());
    return posterior_from(pooled, registry, prior);
  } catch (const Error& e) {
    if (e.code() == "no-polls") return std::nullopt;
    throw;
  }
}

namespace detail {

inline void require_ascending(std::span<const Date> dates) {
  if (!std::is_sorted(dates.begin(), dates.end())) {
    throw Error("unsorted-dates", "series dates must be ascending");
  }
}

template <typename T, typename Fn>
Series<T> run_series(std::span<const Poll> polls, const PartyRegistry& registry,
                     std::span<const Date> dates, const ModelConfig& model, Fn&& per_date) {
  require_ascending(dates);
  Series<T> out;
  for (Date d : dates) {
    auto post = nowcast_posterior(polls, registry, d, model);
    if (!post) {
      out.skipped.push_back(d);
      continue;
    }
    out.points.emplace_back(d, per_date(*post, d));
  }
  if (out.points.empty()) throw Error("no-data", "no requested date has polls in its window");
  return out;
}

}  // namespace detail

inline Series<PoEResult> poe_series(std::span<const Poll> polls, const PartyRegistry& registry,
                                    std::span<const Date> dates, const ElectionRules& rules,
                                    const EventSpec& event, const ModelConfig& model,
                                    std::size_t m, std::uint64_t seed, Parallelism par = {}) {
  detail::require_draws(m);
  return detail::run_series<PoEResult>(
      polls, registry, dates, model, [&](const DirichletPosterior& post, Date) {
        return estimate_poe(post, rules, event, m, seed, par);
      });
}

inline Series<SeatShareDistribution> distribution_series(
    std::span<const Poll> polls, const PartyRegistry& registry, std::span<const Date> dates,
    const ElectionRules& rules, std::span<const std::string> coalition, const ModelConfig& model,
    std::size_t m, std::uint64_t seed, Parallelism par = {}) {
  detail::require_draws(m);
  return detail::run_series<SeatShareDistribution>(
      polls, registry, dates, model, [&](const DirichletPosterior& post, Date) {
        return seat_distribution(post, rules, coalition, m, seed, par);
      });
}

}  // namespace koalition
