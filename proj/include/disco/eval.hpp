#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "disco/operators.hpp"
#include "disco/ranking.hpp"

namespace disco {

struct GroundTruth {
  SiteSet relevant;

  bool contains(const std::string& site_key) const { return relevant.contains(site_key); }
};

/// |top-k ∩ truth| / k. Throws KTooLarge unless 1 <= k <= len.
double precision_at_k(const RankedList& ranked, const GroundTruth& truth, std::size_t k);

/// Number of relevant sites among the candidates; the evaluation k.
std::size_t relevant_in_list(const RankedList& ranked, const GroundTruth& truth);

/// precision_at_k with k = relevant_in_list. Throws NoRelevantInList when that is 0.
double precision_at_r(const RankedList& ranked, const GroundTruth& truth);

/// 0-based positions of the relevant sites, ascending.
std::vector<std::size_t> relevant_positions(const RankedList& ranked, const GroundTruth& truth);

/// Mean 0-based position of the relevant sites. Throws NoRelevantInList.
double mean_rank(const RankedList& ranked, const GroundTruth& truth);

/// Median position; the two middle positions are averaged for even counts.
/// Throws NoRelevantInList.
double median_rank(const RankedList& ranked, const GroundTruth& truth);

/// |discovered ∩ truth| / |discovered|. Throws EmptyDiscovery.
double harvest_rate(const SiteSet& discovered, const GroundTruth& truth);

/// |discovered ∩ universe| / |universe|. Throws EmptyUniverse.
double coverage(const SiteSet& discovered, const GroundTruth& universe);

/// Coverage of one method split by whether another method also found the site.
struct CoverageSplit {
  double coverage = 0.0;
  double intersection = 0.0;  // found by this method and at least one other
  double complement = 0.0;    // found only by this method
};

/// One split per method, in input order. Throws EmptyUniverse.
std::vector<CoverageSplit> coverage_split(std::span<const SiteSet> methods,
                                          const GroundTruth& universe);

/// Union of the given discovery sets.
GroundTruth union_truth(std::span<const SiteSet> methods);

struct DiscoveryEvent {
  std::string site_key;
  std::size_t pages_fetched = 0;  // run total at the moment of discovery
};

struct HarvestPoint {
  std::size_t pages = 0;
  std::size_t discovered = 0;
  std::size_t relevant = 0;
  double harvest_rate = 0.0;  // 0 while nothing is discovered
};

/// Harvest after every `interval` pages up to total_pages, plus a final point
/// at total_pages when it is not a multiple of the interval.
std::vector<HarvestPoint> harvest_series(std::span<const DiscoveryEvent> events,
                                         std::size_t total_pages, const GroundTruth& truth,
                                         std::size_t interval = 500);

}  // namespace disco
