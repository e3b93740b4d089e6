#include <gtest/gtest.h>

#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "support.hpp"

using namespace koalition;

namespace {

DirichletPosterior data_posterior() {
  return DirichletPosterior({"A", "B", "C", "OTHER"}, {400.5, 380.5, 180.5, 40.5});
}

ForecastSpec horizon(int days, double tau = 60.0) {
  const Date as_of(2021, 6, 1);
  return {as_of + days, as_of, tau};
}

}  // namespace

TEST(ShrinkFactor, ShapeOfTheCurve) {
  EXPECT_EQ(shrink_factor(0, 60), 1.0);
  EXPECT_EQ(shrink_factor(60, 60), 0.5);
  double prev = 1.0;
  for (int h = 1; h < 2000; h += 7) {
    const double s = shrink_factor(h, 60);
    EXPECT_LT(s, prev);
    prev = s;
  }
  EXPECT_LT(shrink_factor(1e9, 60), 1e-7);
}

TEST(Inflate, ZeroHorizonIsIdentity) {
  const auto post = data_posterior();
  const auto prior = symmetric_prior(4);
  const auto same = inflate(post, horizon(0), prior);
  EXPECT_EQ(same.alpha(), post.alpha());
}

TEST(Inflate, HorizonTauHalvesDataContent) {
  const auto post = data_posterior();
  const auto prior = symmetric_prior(4);
  const auto half = inflate(post, horizon(60), prior);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_DOUBLE_EQ(half.alpha()[k], 0.5 + 0.5 * (post.alpha()[k] - 0.5));
  }
}

TEST(Inflate, VarianceGrowsWithHorizon) {
  const auto post = data_posterior();
  const auto prior = symmetric_prior(4);
  double prev_total = post.concentration();
  std::vector<double> prev_var = post.marginal_variance();
  for (int h : {1, 30, 60, 90, 120, 365}) {
    const auto out = inflate(post, horizon(h), prior);
    EXPECT_LT(out.concentration(), prev_total);
    const auto mean = out.mean();
    const auto var = out.marginal_variance();
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_NEAR(var[k], mean[k] * (1 - mean[k]) / (out.concentration() + 1), 1e-15);
      EXPECT_GT(var[k], prev_var[k]);
    }
    prev_total = out.concentration();
    prev_var = var;
  }
  const auto v30 = inflate(post, horizon(30), prior).marginal_variance();
  const auto v90 = inflate(post, horizon(90), prior).marginal_variance();
  for (std::size_t k = 0; k < 4; ++k) EXPECT_LT(v30[k], v90[k]);
}

TEST(Inflate, MeanDriftIsBoundedByPriorWeight) {
  const auto post = data_posterior();
  const auto prior = symmetric_prior(4);
  for (int h : {10, 100, 1000}) {
    const auto out = inflate(post, horizon(h), prior);
    const double bound = 2.0 / out.concentration();
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_LE(std::abs(out.mean()[k] - post.mean()[k]), bound);
    }
  }
}

TEST(Inflate, Errors) {
  const auto post = data_posterior();
  const auto prior = symmetric_prior(4);
  try {
    inflate(post, horizon(-1), prior);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "past-election");
  }
  EXPECT_THROW(inflate(post, horizon(10), std::vector<double>(4, 500.0)), Error);
  EXPECT_THROW(inflate(post, horizon(10, 0.0), prior), Error);
  EXPECT_THROW(
      inflate(DirichletPosterior::point_mass({"A", "OTHER"}, {0.5, 0.5}), horizon(10), prior), Error);
}

TEST(ForecastPoe, KnifeEdgeDriftsTowardOneHalf) {
  const auto reg = ktest::make_registry(2);
  ElectionRules rules;
  rules.threshold = 0.0;
  rules.house_size = 599;
  const std::vector<Poll> polls{{"A", Date(2021, 6, 1), 2000, {0.515, 0.485, 0.0}}};
  double prev_gap = 1.0;
  for (int h : {0, 60, 600, 6000}) {
    const auto spec = horizon(h);
    const auto r = forecast_poe(polls, reg, rules, EventSpec::coalition({"P0"}), spec, {}, 100000, 3);
    const auto now = posterior_from(pool(polls, spec.as_of, {}), reg, symmetric_prior(3));
    const auto out = inflate(now, spec, symmetric_prior(3));
    const double exact = boost::math::ibetac(out.alpha()[0], out.alpha()[1], 0.5);
    EXPECT_LE(std::abs(r.probability - exact), 3.0 * std::sqrt(exact * (1 - exact) / 1e5) + 1e-12);
    EXPECT_LT(std::abs(exact - 0.5), prev_gap);
    prev_gap = std::abs(exact - 0.5);
  }
}

TEST(ForecastPoe, ZeroHorizonEqualsNowcastAndSureEventStaysSure) {
  const auto& cfg = ktest::fixture_config();
  const auto& polls = ktest::fixture_polls();
  const Date as_of(2021, 9, 1);
  const auto event = EventSpec::coalition(cfg.coalition("kenia").parties);
  const auto now = estimate_poe(
      posterior_from(pool(polls, as_of, cfg.model.pooling), cfg.registry, cfg.model.prior_for(7)),
      cfg.rules, event, 5000, 42);
  const auto fc = forecast_poe(polls, cfg.registry, cfg.rules, event, {as_of, as_of, cfg.tau},
                               cfg.model, 5000, 42);
  EXPECT_EQ(now, fc);
  std::vector<std::string> named(cfg.registry.ids());
  named.pop_back();
  for (int h : {0, 30, 300}) {
    const auto sure = forecast_poe(polls, cfg.registry, cfg.rules, EventSpec::coalition(named),
                                   {as_of + h, as_of, cfg.tau}, cfg.model, 2000, 1);
    EXPECT_EQ(sure.probability, 1.0);
  }
}

TEST(FanChart, GridAndBands) {
  const auto& cfg = ktest::fixture_config();
  const auto& polls = ktest::fixture_polls();
  const ForecastSpec spec{Date(2021, 9, 26), Date(2021, 8, 27), cfg.tau};
  const auto fan = fan_chart_data(polls, cfg.registry, spec, cfg.model, 7, 4000, 42);
  ASSERT_EQ(fan.parties.size(), 6u);
  const auto& cdu = fan.series[0];
  EXPECT_EQ(cdu.back().date, spec.election_date);
  bool saw_as_of = false;
  for (std::size_t i = 0; i < cdu.size(); ++i) {
    EXPECT_LE(cdu[i].low, cdu[i].high);
    if (cdu[i].date == spec.as_of) saw_as_of = true;
    EXPECT_EQ(cdu[i].forecast, cdu[i].date > spec.as_of);
    if (i > 0) {
      EXPECT_LT(cdu[i - 1].date, cdu[i].date);
    }
  }
  EXPECT_TRUE(saw_as_of);
  for (const auto& series : fan.series) {
    double prev = 0.0;
    for (const auto& p : series) {
      if (p.date < spec.as_of) continue;
      EXPECT_GE(p.high - p.low, prev);
      prev = p.high - p.low;
    }
  }
}

TEST(FanChart, ElectionDayOnlyHasNoFuture) {
  const auto& cfg = ktest::fixture_config();
  const auto& polls = ktest::fixture_polls();
  const ForecastSpec spec{Date(2021, 9, 20), Date(2021, 9, 20), cfg.tau};
  const auto fan = fan_chart_data(polls, cfg.registry, spec, cfg.model, 14, 2000, 1);
  for (const auto& s : fan.series) {
    EXPECT_EQ(s.back().date, spec.as_of);
    for (const auto& p : s) EXPECT_FALSE(p.forecast);
  }
}
