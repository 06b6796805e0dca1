#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "disco/bandit.hpp"
#include "support.hpp"

using namespace disco;
using test::Rng;

namespace {

OperatorStats make_stats(std::array<double, 4> means, std::array<std::uint64_t, 4> retrieved) {
  OperatorStats s;
  for (std::size_t i = 0; i < 4; ++i) {
    s.arms[i].mean_reward = means[i];
    s.arms[i].retrieved = retrieved[i];
    s.arms[i].rounds = retrieved[i] > 0 ? 1 : 0;
    s.total_retrieved += retrieved[i];
  }
  return s;
}

RewardReport report(OperatorId op, std::vector<std::tuple<std::size_t, std::size_t, bool>> e) {
  RewardReport r;
  r.op = op;
  for (const auto& [pos, len, novel] : e) r.entries.push_back({test::key(pos), pos, len, novel});
  return r;
}

}  // namespace

TEST(BanditSelect, Examples) {
  EXPECT_EQ(select_operator(OperatorStats{}), OperatorId::Forward);
  EXPECT_EQ(select_operator(make_stats({0.9, 0.1, 0.1, 0.1}, {100, 100, 100, 100})), OperatorId::Forward);
  EXPECT_EQ(select_operator(make_stats({0.1, 0.1, 0.9, 0.1}, {100, 100, 100, 100})), OperatorId::Keyword);
  // Two live arms: the less explored one carries the larger bonus.
  const auto two = make_stats({0.5, 0.5, 0, 0}, {1000, 10, 0, 0});
  EXPECT_EQ(select_operator(two, {OperatorId::Forward, OperatorId::Backward}), OperatorId::Backward);
  // Initialization plays arms in registry order.
  auto s = make_stats({1, 0, 0, 0}, {5, 0, 0, 0});
  EXPECT_EQ(select_operator(s), OperatorId::Backward);
  s[OperatorId::Backward].rounds = 1;
  s[OperatorId::Backward].retrieved = 1;
  s.total_retrieved += 1;
  EXPECT_EQ(select_operator(s), OperatorId::Keyword);
  // Equal scores fall to registry order.
  EXPECT_EQ(select_operator(make_stats({0.3, 0.3, 0.3, 0.3}, {7, 7, 7, 7})), OperatorId::Forward);
  EXPECT_EQ(select_operator(make_stats({0.2, 0.3, 0.3, 0.3}, {7, 7, 7, 7})), OperatorId::Backward);
}

TEST(BanditSelect, ScoreFormula) {
  const auto s = make_stats({0.5, 0.25, 0, 0}, {1000, 10, 0, 0});
  EXPECT_NEAR(ucb_score(s, OperatorId::Forward), 0.5 + std::sqrt(2 * std::log(1010.0) / 1000), 1e-12);
  EXPECT_NEAR(ucb_score(s, OperatorId::Backward), 0.25 + std::sqrt(2 * std::log(1010.0) / 10), 1e-12);
  EXPECT_EQ(ucb_score(s, OperatorId::Keyword), std::numeric_limits<double>::infinity());
}

TEST(BanditReward, Examples) {
  EXPECT_EQ(compute_reward(report(OperatorId::Forward, {{0, 10, true}})), 1.0);
  EXPECT_EQ(compute_reward(report(OperatorId::Forward, {{3, 10, false}})), 0.0);
  EXPECT_NEAR(compute_reward(report(OperatorId::Forward, {{2, 10, true}, {4, 10, true}})), 0.7, 1e-12);
  EXPECT_EQ(compute_reward(RewardReport{}), 0.0);
}

TEST(BanditUpdate, Examples) {
  auto s = update(OperatorStats{}, OperatorId::Related, report(OperatorId::Related, {{0, 1, true}}));
  EXPECT_EQ(s[OperatorId::Related].mean_reward, 1.0);
  EXPECT_EQ(s[OperatorId::Related].retrieved, 1u);
  EXPECT_EQ(s[OperatorId::Related].rounds, 1u);
  EXPECT_EQ(s.total_retrieved, 1u);

  OperatorStats half;
  half[OperatorId::Forward] = {0.5, 10, 2};
  half.total_retrieved = 10;
  // Ten sites, half novel at position 0: reward 0.5.
  std::vector<std::tuple<std::size_t, std::size_t, bool>> exact;
  for (std::size_t i = 0; i < 10; ++i) exact.emplace_back(0, 2, i % 2 == 0);
  const auto fixed = update(half, OperatorId::Forward, report(OperatorId::Forward, exact));
  EXPECT_DOUBLE_EQ(fixed[OperatorId::Forward].mean_reward, 0.5);
  EXPECT_EQ(fixed[OperatorId::Forward].retrieved, 20u);
  EXPECT_EQ(fixed[OperatorId::Forward].rounds, 3u);

  const auto empty = update(half, OperatorId::Forward, RewardReport{OperatorId::Forward, {}});
  EXPECT_LT(empty[OperatorId::Forward].mean_reward, 0.5);
  EXPECT_EQ(empty[OperatorId::Forward].retrieved, 11u);
  EXPECT_EQ(empty.total_retrieved, 11u);
  EXPECT_EQ(half[OperatorId::Forward].retrieved, 10u);  // input untouched
}

TEST(BanditProperty, ScoreMonotonicity) {
  Rng rng(31);
  for (int i = 0; i < 500; ++i) {
    const double mean = rng.unit();
    const std::uint64_t n_op = rng.between(1, 1000);
    const std::uint64_t other = rng.between(1, 1000);
    const auto base = make_stats({mean, 0.5, 0.5, 0.5}, {n_op, other, 1, 1});
    // Holding n fixed, a larger n_op shrinks the bonus.
    auto fixed_n = base;
    fixed_n[OperatorId::Forward].retrieved += rng.between(1, 100);
    EXPECT_LT(ucb_score(fixed_n, OperatorId::Forward), ucb_score(base, OperatorId::Forward));
    // Larger n with n_op fixed: larger bonus.
    auto more_n = base;
    more_n.total_retrieved += rng.between(1, 100);
    EXPECT_GT(ucb_score(more_n, OperatorId::Forward), ucb_score(base, OperatorId::Forward));
  }
}

TEST(BanditProperty, RewardBoundsAndDuplicates) {
  Rng rng(32);
  for (int i = 0; i < 1000; ++i) {
    RewardReport r;
    const std::size_t len = rng.between(1, 200);
    for (std::size_t k = rng.between(1, 30); k > 0; --k) {
      const bool novel = rng.coin();
      r.entries.push_back({test::key(k), rng.below(len), len, novel});
    }
    const double reward = compute_reward(r);
    EXPECT_GE(reward, 0.0);
    EXPECT_LE(reward, 1.0);
    for (auto& e : r.entries) e.novel = false;
    EXPECT_EQ(compute_reward(r), 0.0);
  }
}

TEST(BanditProperty, CountsStayConsistent) {
  Rng rng(33);
  for (int run = 0; run < 100; ++run) {
    OperatorStats s;
    for (int round = 0; round < 50; ++round) {
      const auto op = select_operator(s);
      RewardReport r{op, {}};
      const std::size_t len = rng.between(1, 100);
      for (std::size_t k = rng.below(6); k > 0; --k) r.entries.push_back({test::key(k), rng.below(len), len, rng.coin()});
      s = update(s, op, r);
      std::uint64_t sum = 0;
      for (const auto& a : s.arms) {
        sum += a.retrieved;
        EXPECT_GE(a.retrieved, a.rounds);
        EXPECT_GE(a.mean_reward, 0.0);
        EXPECT_LE(a.mean_reward, 1.0);
      }
      EXPECT_EQ(sum, s.total_retrieved);
    }
  }
}

TEST(BanditProperty, PrefersTheBestArm) {
  const std::array<double, 4> rates = {0.8, 0.1, 0.1, 0.1};
  double share = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    OperatorStats s;
    std::size_t best = 0;
    for (int round = 0; round < 150; ++round) {
      const auto op = select_operator(s);
      const bool success = rng.coin(rates[index_of(op)]);
      s = update(s, op, report(op, {{0, 1, success}}));
      if (round >= 50 && op == OperatorId::Forward) ++best;
    }
    share += static_cast<double>(best) / 100.0;
  }
  EXPECT_GE(share / 20.0, 0.6);
}
