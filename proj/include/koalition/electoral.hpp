#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "koalition/error.hpp"
#include "koalition/registry.hpp"

namespace koalition {

enum class SeatMethod { sainte_lague, dhondt };

inline std::string_view to_string(SeatMethod m) {
  return m == SeatMethod::sainte_lague ? "sainte-lague" : "dhondt";
}

struct ElectionRules {
  double threshold = 0.05;
  int house_size = 598;
  SeatMethod method = SeatMethod::sainte_lague;

  void validate() const {
    if (!(threshold >= 0.0 && threshold < 0.5)) {
      throw ConfigError("bad-rules", "threshold must lie in [0, 0.5)");
    }
    if (house_size < 1) throw ConfigError("bad-rules", "house_size must be >= 1");
  }
};

/// Shares after the threshold: ineligible entries are 0, eligible ones are
/// renormalized to sum 1. `hung` is set when nobody passed.
struct Eligibility {
  std::vector<double> shares;
  std::vector<char> eligible;
  bool hung = false;
};

struct SeatAllocation {
  std::vector<int> seats;
  std::vector<char> eligible;

  bool hung() const {
    for (char e : eligible) {
      if (e) return false;
    }
    return true;
  }

  friend bool operator==(const SeatAllocation&, const SeatAllocation&) = default;
};

namespace detail {

/// Marks parties at or above the threshold; the other bucket never qualifies.
/// Returns the eligible share total (0 when hung).
inline double mark_eligible(std::span<const double> shares, std::size_t other_index,
                            double threshold, std::span<char> eligible) {
  double total = 0.0;
  for (std::size_t k = 0; k < shares.size(); ++k) {
    eligible[k] = (k != other_index && !(shares[k] < threshold)) ? 1 : 0;
    if (eligible[k]) total += shares[k];
  }
  return total;
}

/// Sequential highest averages over the eligible entries of `values`. Values
/// need not be normalized. The next seat goes to the largest quotient; equal
/// quotients go to the lower index.
inline void highest_averages(std::span<const double> values, std::span<const char> eligible,
                             int house_size, SeatMethod method, std::span<int> seats) {
  const std::size_t n = values.size();
  std::fill(seats.begin(), seats.end(), 0);
  bool any = false;
  for (std::size_t k = 0; k < n; ++k) any = any || eligible[k];
  if (!any) return;
  const double step = method == SeatMethod::sainte_lague ? 2.0 : 1.0;
  // quotient[k] = value / divisor(seats); divisor starts at 1 for both methods.
  double quotient_buf[32];
  std::vector<double> heap_buf;
  double* quotient = quotient_buf;
  if (n > 32) {
    heap_buf.resize(n);
    quotient = heap_buf.data();
  }
  // Head start: floor(quota) - (K + 1) seats per party is a lower bound on
  // the final count for both divisor series. Greedy completion from any
  // per-party prefix of the winning quotients picks the same remaining
  // quotients, ties included, so only about K^2 seats are handed out one by
  // one.
  double total = 0.0;
  int parties = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (eligible[k]) {
      total += values[k];
      ++parties;
    }
  }
  int assigned = 0;
  if (total > 0.0) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!eligible[k]) continue;
      const double quota = values[k] / total * static_cast<double>(house_size);
      const double start = std::floor(quota) - static_cast<double>(parties + 1);
      seats[k] = start > 0.0 ? static_cast<int>(start) : 0;
      assigned += seats[k];
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    quotient[k] = eligible[k] ? values[k] / (1.0 + step * seats[k]) : -1.0;
  }
  for (int seat = assigned; seat < house_size; ++seat) {
    std::size_t best = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (eligible[k] && (best == n || quotient[k] > quotient[best])) best = k;
    }
    ++seats[best];
    quotient[best] = values[best] / (1.0 + step * seats[best]);
  }
}

}  // namespace detail

inline Eligibility apply_threshold(std::span<const double> shares, std::size_t other_index,
                                   const ElectionRules& rules) {
  Eligibility out;
  out.shares.assign(shares.size(), 0.0);
  out.eligible.assign(shares.size(), 0);
  const double total =
      detail::mark_eligible(shares, other_index, rules.threshold, out.eligible);
  out.hung = !(total > 0.0);
  if (out.hung) {
    std::fill(out.eligible.begin(), out.eligible.end(), 0);
    return out;
  }
  for (std::size_t k = 0; k < shares.size(); ++k) {
    if (out.eligible[k]) out.shares[k] = shares[k] / total;
  }
  return out;
}

/// Seats for the eligible parties. Scaling all shares by a positive constant
/// leaves the result unchanged.
inline SeatAllocation allocate_seats(const Eligibility& eligibility, const ElectionRules& rules) {
  SeatAllocation out;
  out.eligible = eligibility.hung ? std::vector<char>(eligibility.shares.size(), 0)
                                  : eligibility.eligible;
  out.seats.assign(eligibility.shares.size(), 0);
  detail::highest_averages(eligibility.shares, out.eligible, rules.house_size, rules.method,
                           out.seats);
  return out;
}

/// Convenience overload: every strictly positive entry is eligible.
inline SeatAllocation allocate_seats(std::span<const double> eligible_shares,
                                     const ElectionRules& rules) {
  Eligibility e;
  e.shares.assign(eligible_shares.begin(), eligible_shares.end());
  e.eligible.resize(e.shares.size());
  bool any = false;
  for (std::size_t k = 0; k < e.shares.size(); ++k) {
    e.eligible[k] = e.shares[k] > 0.0 ? 1 : 0;
    any = any || e.eligible[k];
  }
  e.hung = !any;
  return allocate_seats(e, rules);
}

inline int coalition_seats(const SeatAllocation& alloc, std::span<const std::size_t> members) {
  int total = 0;
  for (std::size_t k : members) {
    if (k >= alloc.seats.size()) throw Error("unknown-party", "coalition member out of range");
    total += alloc.seats[k];
  }
  return total;
}

inline int coalition_seats(const SeatAllocation& alloc, const PartyRegistry& registry,
                           std::span<const std::string> coalition) {
  const auto members = registry.indices_of(coalition);
  return coalition_seats(alloc, members);
}

/// Strictly more than half the house.
inline bool has_majority(int seats, const ElectionRules& rules) {
  return 2LL * seats > static_cast<long long>(rules.house_size);
}

/// True iff some proper subset of the coalition already holds a majority.
/// With non-negative seats this is the same as the coalition minus its
/// smallest member having a majority; we enumerate all proper subsets.
inline bool subset_sufficient(const SeatAllocation& alloc, std::span<const std::size_t> members,
                              const ElectionRules& rules) {
  if (members.empty()) throw Error("empty-coalition", "coalition must name at least one party");
  if (members.size() > 20) throw Error("coalition-too-large", "at most 20 coalition members");
  const std::uint32_t full = (1u << members.size()) - 1u;
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    int seats = 0;
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (mask & (1u << j)) seats += alloc.seats.at(members[j]);
    }
    if (has_majority(seats, rules)) return true;
  }
  return false;
}

inline bool subset_sufficient(const SeatAllocation& alloc, const PartyRegistry& registry,
                              std::span<const std::string> coalition,
                              const ElectionRules& rules) {
  const auto members = registry.indices_of(coalition);
  return subset_sufficient(alloc, members, rules);
}

}  // namespace koalition
