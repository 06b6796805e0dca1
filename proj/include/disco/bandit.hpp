#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "disco/types.hpp"

namespace disco {

/// Running statistics of one discovery operator.
struct ArmStats {
  double mean_reward = 0.0;     // website-weighted mean of per-round rewards, in [0, 1]
  std::uint64_t retrieved = 0;  // websites credited to this operator (n_op)
  std::uint64_t rounds = 0;     // invocations

  bool operator==(const ArmStats&) const = default;
};

/// UCB1 state over the operator registry. Counts are websites retrieved, not plays.
struct OperatorStats {
  std::array<ArmStats, kOperators.size()> arms{};
  std::uint64_t total_retrieved = 0;  // n

  const ArmStats& operator[](OperatorId op) const { return arms[index_of(op)]; }
  ArmStats& operator[](OperatorId op) { return arms[index_of(op)]; }

  bool operator==(const OperatorStats&) const = default;
};

struct RewardEntry {
  std::string site_key;
  std::size_t position = 0;  // in the global ranked list
  std::size_t length = 0;    // of the global ranked list
  bool novel = false;
};

struct RewardReport {
  OperatorId op = OperatorId::Forward;
  std::vector<RewardEntry> entries;
};

/// mean_reward + sqrt(2 ln n / n_op). Infinite when the arm has retrieved nothing.
double ucb_score(const OperatorStats& stats, OperatorId op);

/// Plays every arm once in registry order, then maximizes ucb_score (ties by
/// registry order).
OperatorId select_operator(const OperatorStats& stats);

/// Same as above but only over the given arms.
OperatorId select_operator(const OperatorStats& stats, const std::vector<OperatorId>& allowed);

/// (1/k) sum (1 - pos/len) * novel; 0 for an empty report.
double compute_reward(const RewardReport& report);

/// Folds a round into the statistics. An empty round counts as one website with
/// reward 0.
OperatorStats update(const OperatorStats& stats, OperatorId op, const RewardReport& report);

}  // namespace disco
