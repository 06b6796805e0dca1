#include "disco/bandit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace disco {

double ucb_score(const OperatorStats& stats, OperatorId op) {
  const auto& arm = stats[op];
  if (arm.retrieved == 0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(std::max<std::uint64_t>(stats.total_retrieved, 1));
  return arm.mean_reward + std::sqrt(2.0 * std::log(n) / static_cast<double>(arm.retrieved));
}

OperatorId select_operator(const OperatorStats& stats, const std::vector<OperatorId>& allowed) {
  if (allowed.empty()) throw std::invalid_argument("select_operator: no operators allowed");
  for (const auto op : allowed) {
    if (stats[op].rounds == 0) return op;
  }
  OperatorId best = allowed.front();
  double best_score = ucb_score(stats, best);
  for (std::size_t i = 1; i < allowed.size(); ++i) {
    const double s = ucb_score(stats, allowed[i]);
    if (s > best_score) {
      best = allowed[i];
      best_score = s;
    }
  }
  return best;
}

OperatorId select_operator(const OperatorStats& stats) {
  return select_operator(stats, {kOperators.begin(), kOperators.end()});
}

double compute_reward(const RewardReport& report) {
  if (report.entries.empty()) return 0.0;
  double total = 0.0;
  for (const auto& e : report.entries) {
    if (!e.novel || e.length == 0) continue;
    if (e.position >= e.length) throw std::invalid_argument("reward entry position out of range");
    total += 1.0 - static_cast<double>(e.position) / static_cast<double>(e.length);
  }
  return total / static_cast<double>(report.entries.size());
}

OperatorStats update(const OperatorStats& stats, OperatorId op, const RewardReport& report) {
  OperatorStats next = stats;
  auto& arm = next[op];
  const std::uint64_t k = std::max<std::uint64_t>(1, report.entries.size());
  const double reward = compute_reward(report);
  const double prior = static_cast<double>(arm.retrieved);
  arm.mean_reward = (arm.mean_reward * prior + reward * static_cast<double>(k)) /
                    (prior + static_cast<double>(k));
  arm.retrieved += k;
  arm.rounds += 1;
  next.total_retrieved += k;
  return next;
}

}  // namespace disco
