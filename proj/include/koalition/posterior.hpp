#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "koalition/error.hpp"
#include "koalition/parallel.hpp"
#include "koalition/pooling.hpp"
#include "koalition/registry.hpp"
#include "koalition/rng.hpp"

namespace koalition {

/// Dirichlet distribution over party shares, in registry order with the
/// other bucket last. A point-mass posterior (infinite concentration) is
/// supported for scenario analysis: every draw equals its mean exactly.
class DirichletPosterior {
 public:
  DirichletPosterior(std::vector<std::string> ids, std::vector<double> alpha)
      : ids_(std::move(ids)), alpha_(std::move(alpha)) {
    if (ids_.size() != alpha_.size() || ids_.empty()) {
      throw Error("bad-posterior", "party ids and concentrations differ in length");
    }
    for (double a : alpha_) {
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw Error("bad-posterior", "Dirichlet concentrations must be positive and finite");
      }
    }
  }

  /// Degenerate posterior fixed at `shares`. Shares are rescaled to sum 1
  /// unless they already do within 1e-12, in which case they are kept bit
  /// for bit (so a share of exactly 0.05 stays exactly 0.05).
  static DirichletPosterior point_mass(std::vector<std::string> ids, std::vector<double> shares) {
    double total = 0.0;
    for (double s : shares) {
      if (s < 0.0) throw Error("bad-posterior", "point-mass shares must be non-negative");
      total += s;
    }
    if (!(total > 0.0)) throw Error("bad-posterior", "point-mass shares sum to zero");
    DirichletPosterior p(std::move(ids), std::vector<double>(shares.size(), 1.0));
    const bool exact = std::abs(total - 1.0) <= 1e-12;
    for (std::size_t k = 0; k < shares.size(); ++k) {
      p.alpha_[k] = exact ? shares[k] : shares[k] / total;
    }
    p.point_mass_ = true;
    return p;
  }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<double>& alpha() const { return alpha_; }
  std::size_t size() const { return alpha_.size(); }
  std::size_t other_index() const { return alpha_.size() - 1; }
  bool is_point_mass() const { return point_mass_; }

  double concentration() const {
    return point_mass_ ? std::numeric_limits<double>::infinity()
                       : std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
  }

  std::vector<double> mean() const {
    if (point_mass_) return alpha_;
    const double total = std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
    std::vector<double> m(alpha_.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = alpha_[k] / total;
    return m;
  }

  /// Marginal variance a_k (A - a_k) / (A^2 (A + 1)).
  std::vector<double> marginal_variance() const {
    auto m = mean();
    if (point_mass_) return std::vector<double>(m.size(), 0.0);
    const double total = concentration();
    for (auto& v : m) v = v * (1.0 - v) / (total + 1.0);
    return m;
  }

  /// Pooled data this posterior was conditioned on, when known.
  std::optional<PooledSample> source;

 private:
  std::vector<std::string> ids_;
  std::vector<double> alpha_;
  bool point_mass_ = false;
};

inline std::vector<double> symmetric_prior(std::size_t parties, double alpha0 = 0.5) {
  return std::vector<double>(parties, alpha0);
}

/// Conjugate update: alpha_k = prior_k + counts_k.
inline DirichletPosterior posterior_from(const PooledSample& pooled,
                                         const PartyRegistry& registry,
                                         std::span<const double> prior_alpha) {
  if (prior_alpha.size() != registry.size() || pooled.counts.size() != registry.size()) {
    throw Error("bad-prior", "prior, counts and registry sizes differ");
  }
  std::vector<double> alpha(registry.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (!(prior_alpha[k] > 0.0) || !std::isfinite(prior_alpha[k])) {
      throw Error("bad-prior", "prior concentrations must be positive");
    }
    alpha[k] = prior_alpha[k] + static_cast<double>(pooled.counts[k]);
  }
  DirichletPosterior post(registry.ids(), std::move(alpha));
  post.source = pooled;
  return post;
}

/// m x K row-major matrix of share vectors.
class DrawMatrix {
 public:
  DrawMatrix(std::size_t rows, std::size_t cols, std::uint64_t seed)
      : rows_(rows), cols_(cols), seed_(seed), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint64_t seed() const { return seed_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const DrawMatrix&, const DrawMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::uint64_t seed_;
  std::vector<double> data_;
};

/// Draws share vectors one index at a time. Component k of draw i is driven
/// by a Philox stream keyed on (seed, party id) with counter i, so a draw
/// depends only on (seed, i) and each party's variate travels with its id
/// when the registry is reordered. Normalization sums in key order for the
/// same reason.
class ShareSampler {
 public:
  ShareSampler(const DirichletPosterior& posterior, std::uint64_t seed)
      : alpha_(posterior.alpha()), point_mass_(posterior.is_point_mass()), keys_(alpha_.size()),
        sum_order_(alpha_.size()) {
    for (std::size_t k = 0; k < keys_.size(); ++k) {
      keys_[k] = splitmix64(seed ^ splitmix64(fnv1a64(posterior.ids()[k])));
    }
    std::iota(sum_order_.begin(), sum_order_.end(), std::size_t{0});
    std::sort(sum_order_.begin(), sum_order_.end(),
              [&](std::size_t a, std::size_t b) { return keys_[a] < keys_[b]; });
  }

  std::size_t size() const { return alpha_.size(); }

  void draw(std::uint64_t index, std::span<double> out) const {
    if (point_mass_) {
      std::copy(alpha_.begin(), alpha_.end(), out.begin());
      return;
    }
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < alpha_.size(); ++k) {
      CounterStream stream(keys_[k], index);
      out[k] = log_gamma_variate(alpha_[k], stream);
      max_log = std::max(max_log, out[k]);
    }
    double total = 0.0;
    for (std::size_t k : sum_order_) {
      out[k] = std::exp(out[k] - max_log);
      total += out[k];
    }
    for (double& v : out) v /= total;
  }

 private:
  std::vector<double> alpha_;
  bool point_mass_;
  std::vector<std::uint64_t> keys_;
  std::vector<std::size_t> sum_order_;
};

/// m independent Dirichlet draws; bit-identical for any worker count.
inline DrawMatrix sample_shares(const DirichletPosterior& posterior, std::size_t m,
                                std::uint64_t seed, Parallelism par = {}) {
  if (m == 0) throw Error("empty-request", "at least one draw is required");
  DrawMatrix draws(m, posterior.size(), seed);
  const ShareSampler sampler(posterior, seed);
  parallel_chunks(m, par, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) sampler.draw(i, draws.row(i));
  });
  return draws;
}

}  // namespace koalition
