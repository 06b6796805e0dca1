#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "disco/corpus.hpp"
#include "disco/types.hpp"

namespace disco {

/// Capabilities of a search backend. Implementations return absolute URLs and
/// never more than `limit` of them. Search calls signal quota or transport
/// problems with ProviderError; fetch signals per-page failures with FetchError.
/// Implementations must tolerate concurrent fetch calls.
class SearchProvider {
 public:
  virtual ~SearchProvider() = default;

  virtual std::vector<std::string> keyword_search(std::string_view query, std::size_t limit) = 0;
  /// Pages linking to `url`.
  virtual std::vector<std::string> backlink_search(std::string_view url, std::size_t limit) = 0;
  /// Sites related to the host `site_key`.
  virtual std::vector<std::string> related_search(std::string_view site_key,
                                                  std::size_t limit) = 0;
  /// Raw page source.
  virtual std::string fetch(std::string_view url) = 0;
};

/// Query bookkeeping for the keyword operator.
struct KeywordState {
  std::string seed_keyword;
  std::set<std::string> used_queries;
  std::vector<std::string> candidate_tokens;  // most recent frequency ordering

  bool operator==(const KeywordState&) const = default;
};

struct DiscoveryResult {
  OperatorId op = OperatorId::Forward;
  std::vector<WebsiteRecord> websites;  // distinct, all novel
  std::size_t pages_fetched = 0;        // fetch attempts, including failures
  std::size_t api_calls = 0;
  std::size_t fetch_failures = 0;
  bool unavailable = false;  // a search call failed; websites is empty
  std::string error;
};

using SiteSet = std::unordered_set<std::string>;

struct OperatorContext {
  std::size_t page_budget = 500;
  std::size_t backlink_limit = 5;
  std::size_t keyword_limit = 50;
  std::size_t related_limit = 50;
  std::size_t max_new_keywords = 20;
  std::size_t workers = 1;  // concurrent page fetches
  std::uint32_t iteration = 0;
  double fetch_time = 0.0;
  const Tokenizer* tokenizer = nullptr;  // default tokenizer when null
};

/// Follows outlinks of the top-k pages to sites not in `known`.
DiscoveryResult forward_crawl(std::span<const WebsiteRecord> topk, const SiteSet& known,
                              SearchProvider& provider, const OperatorContext& ctx);

/// Backlink search for each top-k page, then forward crawling from the hubs found.
DiscoveryResult backward_crawl(std::span<const WebsiteRecord> topk, const SiteSet& known,
                               SearchProvider& provider, const OperatorContext& ctx);

/// Queries "<seed keyword> <token>" for the most frequent unused metadata tokens.
DiscoveryResult keyword_search(std::span<const WebsiteRecord> topk, const SiteSet& known,
                               SearchProvider& provider, KeywordState& state,
                               const OperatorContext& ctx);

/// Related-site search keyed by each top-k host.
DiscoveryResult related_search(std::span<const WebsiteRecord> topk, const SiteSet& known,
                               SearchProvider& provider, const OperatorContext& ctx);

DiscoveryResult run_operator(OperatorId op, std::span<const WebsiteRecord> topk,
                             const SiteSet& known, SearchProvider& provider, KeywordState& state,
                             const OperatorContext& ctx);

/// Metadata tokens of the pages ordered by frequency (ties alphabetical),
/// excluding the seed keyword's own tokens.
std::vector<std::string> rank_keyword_candidates(std::span<const WebsiteRecord> pages,
                                                 std::string_view seed_keyword);

}  // namespace disco
