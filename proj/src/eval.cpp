#include "disco/eval.hpp"

#include <algorithm>
#include <stdexcept>

#include "disco/error.hpp"

namespace disco {

double precision_at_k(const RankedList& ranked, const GroundTruth& truth, std::size_t k) {
  if (k == 0 || k > ranked.size()) {
    throw KTooLarge("k=" + std::to_string(k) + " outside [1, " + std::to_string(ranked.size()) +
                    "]");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += truth.contains(ranked.items[i].site_key) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

std::size_t relevant_in_list(const RankedList& ranked, const GroundTruth& truth) {
  return static_cast<std::size_t>(
      std::count_if(ranked.items.begin(), ranked.items.end(),
                    [&](const RankedItem& it) { return truth.contains(it.site_key); }));
}

double precision_at_r(const RankedList& ranked, const GroundTruth& truth) {
  const auto r = relevant_in_list(ranked, truth);
  if (r == 0) throw NoRelevantInList("no relevant site among the candidates");
  return precision_at_k(ranked, truth, r);
}

std::vector<std::size_t> relevant_positions(const RankedList& ranked, const GroundTruth& truth) {
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (truth.contains(ranked.items[i].site_key)) pos.push_back(i);
  }
  return pos;
}

double mean_rank(const RankedList& ranked, const GroundTruth& truth) {
  const auto pos = relevant_positions(ranked, truth);
  if (pos.empty()) throw NoRelevantInList("no relevant site among the candidates");
  std::size_t sum = 0;
  for (const auto p : pos) sum += p;
  return static_cast<double>(sum) / static_cast<double>(pos.size());
}

double median_rank(const RankedList& ranked, const GroundTruth& truth) {
  const auto pos = relevant_positions(ranked, truth);
  if (pos.empty()) throw NoRelevantInList("no relevant site among the candidates");
  const std::size_t n = pos.size();
  if (n % 2 == 1) return static_cast<double>(pos[n / 2]);
  return (static_cast<double>(pos[n / 2 - 1]) + static_cast<double>(pos[n / 2])) / 2.0;
}

double harvest_rate(const SiteSet& discovered, const GroundTruth& truth) {
  if (discovered.empty()) throw EmptyDiscovery("nothing discovered");
  std::size_t hits = 0;
  for (const auto& s : discovered) hits += truth.contains(s) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(discovered.size());
}

double coverage(const SiteSet& discovered, const GroundTruth& universe) {
  if (universe.relevant.empty()) throw EmptyUniverse("empty coverage universe");
  std::size_t hits = 0;
  for (const auto& s : universe.relevant) hits += discovered.contains(s) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(universe.relevant.size());
}

std::vector<CoverageSplit> coverage_split(std::span<const SiteSet> methods,
                                          const GroundTruth& universe) {
  if (universe.relevant.empty()) throw EmptyUniverse("empty coverage universe");
  const double n = static_cast<double>(universe.relevant.size());
  std::vector<CoverageSplit> out;
  out.reserve(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    std::size_t found = 0;
    std::size_t shared = 0;
    for (const auto& s : universe.relevant) {
      if (!methods[m].contains(s)) continue;
      ++found;
      for (std::size_t o = 0; o < methods.size(); ++o) {
        if (o != m && methods[o].contains(s)) {
          ++shared;
          break;
        }
      }
    }
    out.push_back({static_cast<double>(found) / n, static_cast<double>(shared) / n,
                   static_cast<double>(found - shared) / n});
  }
  return out;
}

GroundTruth union_truth(std::span<const SiteSet> methods) {
  GroundTruth truth;
  for (const auto& m : methods) truth.relevant.insert(m.begin(), m.end());
  return truth;
}

std::vector<HarvestPoint> harvest_series(std::span<const DiscoveryEvent> events,
                                         std::size_t total_pages, const GroundTruth& truth,
                                         std::size_t interval) {
  if (interval == 0) throw std::invalid_argument("harvest interval must be positive");
  std::vector<DiscoveryEvent> sorted(events.begin(), events.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.pages_fetched < b.pages_fetched;
  });
  std::vector<std::size_t> marks;
  for (std::size_t p = interval; p <= total_pages; p += interval) marks.push_back(p);
  if (total_pages > 0 && total_pages % interval != 0) marks.push_back(total_pages);

  std::vector<HarvestPoint> series;
  std::size_t next = 0;
  std::size_t discovered = 0;
  std::size_t relevant = 0;
  SiteSet seen;
  for (const auto mark : marks) {
    while (next < sorted.size() && sorted[next].pages_fetched <= mark) {
      if (seen.insert(sorted[next].site_key).second) {
        ++discovered;
        relevant += truth.contains(sorted[next].site_key) ? 1 : 0;
      }
      ++next;
    }
    series.push_back({mark, discovered, relevant,
                      discovered == 0 ? 0.0
                                      : static_cast<double>(relevant) /
                                            static_cast<double>(discovered)});
  }
  return series;
}

}  // namespace disco
