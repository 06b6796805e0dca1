#include "disco/operators.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <optional>
#include <stdexcept>
#include <thread>

#include "disco/error.hpp"

namespace disco {

namespace {

// Fetches every URL, `workers` at a time; failed fetches come back empty.
std::vector<std::optional<std::string>> fetch_all(SearchProvider& provider,
                                                  std::span<const std::string> urls,
                                                  std::size_t workers) {
  std::vector<std::optional<std::string>> pages(urls.size());
  const auto fetch_one = [&](std::size_t i) {
    try {
      pages[i] = provider.fetch(urls[i]);
    } catch (const FetchError&) {
    } catch (const ProviderError&) {
    }
  };
  if (workers <= 1 || urls.size() <= 1) {
    for (std::size_t i = 0; i < urls.size(); ++i) fetch_one(i);
    return pages;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    const std::size_t n = std::min(workers, urls.size());
    pool.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < urls.size(); i = next++) fetch_one(i);
      });
    }
  }
  return pages;
}

class Harvest {
 public:
  Harvest(OperatorId op, const SiteSet& known, SearchProvider& provider,
          const OperatorContext& ctx)
      : known_(known), provider_(provider), ctx_(ctx) {
    result_.op = op;
  }

  bool budget_left() const { return result_.pages_fetched < ctx_.page_budget; }

  std::optional<PageDoc> fetch_page(const std::string& url) {
    if (!budget_left()) return std::nullopt;
    ++result_.pages_fetched;
    auto pages = fetch_all(provider_, std::span(&url, 1), 1);
    if (!pages[0]) {
      ++result_.fetch_failures;
      return std::nullopt;
    }
    return parse(url, *pages[0]);
  }

  /// Fetches one page for every novel site among `urls`, in order, within budget.
  void take(std::span<const std::string> urls) {
    std::vector<std::string> batch;
    for (const auto& url : urls) {
      if (result_.pages_fetched + batch.size() >= ctx_.page_budget) break;
      std::string key;
      try {
        key = normalize_site_key(url);
      } catch (const MalformedUrl&) {
        continue;
      }
      if (known_.contains(key) || !claimed_.insert(key).second) continue;
      batch.push_back(url);
    }
    result_.pages_fetched += batch.size();
    const auto pages = fetch_all(provider_, batch, ctx_.workers);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (!pages[i]) {
        ++result_.fetch_failures;
        continue;
      }
      WebsiteRecord record;
      record.best_page = parse(batch[i], *pages[i]);
      record.site_key = record.best_page.site_key;
      record.discovered_by = result_.op;
      record.discovered_at_iteration = ctx_.iteration;
      result_.websites.push_back(std::move(record));
    }
  }

  void count_api_call() { ++result_.api_calls; }

  DiscoveryResult finish() { return std::move(result_); }

  DiscoveryResult fail(const std::string& message) {
    result_.websites.clear();
    result_.unavailable = true;
    result_.error = message;
    return std::move(result_);
  }

 private:
  PageDoc parse(const std::string& url, const std::string& html) const {
    return ctx_.tokenizer != nullptr ? parse_page(url, html, ctx_.fetch_time, *ctx_.tokenizer)
                                     : parse_page(url, html, ctx_.fetch_time);
  }

  const SiteSet& known_;
  SearchProvider& provider_;
  const OperatorContext& ctx_;
  SiteSet claimed_;
  DiscoveryResult result_;
};

}  // namespace

DiscoveryResult forward_crawl(std::span<const WebsiteRecord> topk, const SiteSet& known,
                              SearchProvider& provider, const OperatorContext& ctx) {
  Harvest harvest(OperatorId::Forward, known, provider, ctx);
  for (const auto& site : topk) {
    if (!harvest.budget_left()) break;
    const auto page = harvest.fetch_page(site.best_page.url);
    if (page) harvest.take(page->outlinks);
  }
  return harvest.finish();
}

DiscoveryResult backward_crawl(std::span<const WebsiteRecord> topk, const SiteSet& known,
                               SearchProvider& provider, const OperatorContext& ctx) {
  Harvest harvest(OperatorId::Backward, known, provider, ctx);
  std::unordered_set<std::string> hubs_seen;
  for (const auto& site : topk) {
    if (!harvest.budget_left()) break;
    std::vector<std::string> hubs;
    try {
      harvest.count_api_call();
      hubs = provider.backlink_search(site.best_page.url, ctx.backlink_limit);
    } catch (const ProviderError& e) {
      return harvest.fail(e.what());
    }
    if (hubs.size() > ctx.backlink_limit) hubs.resize(ctx.backlink_limit);
    for (const auto& hub : hubs) {
      if (!harvest.budget_left()) break;
      if (!hubs_seen.insert(hub).second) continue;
      const auto page = harvest.fetch_page(hub);
      if (page) harvest.take(page->outlinks);
    }
  }
  return harvest.finish();
}

std::vector<std::string> rank_keyword_candidates(std::span<const WebsiteRecord> pages,
                                                 std::string_view seed_keyword) {
  const auto seed_tokens = tokenize(seed_keyword);
  std::map<std::string, std::size_t> freq;
  for (const auto& site : pages) {
    for (const auto& tok : site.best_page.meta_tokens) {
      if (std::find(seed_tokens.begin(), seed_tokens.end(), tok) == seed_tokens.end()) ++freq[tok];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ordered(freq.begin(), freq.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(ordered.size());
  for (auto& [tok, n] : ordered) tokens.push_back(std::move(tok));
  return tokens;
}

DiscoveryResult keyword_search(std::span<const WebsiteRecord> topk, const SiteSet& known,
                               SearchProvider& provider, KeywordState& state,
                               const OperatorContext& ctx) {
  if (tokenize(state.seed_keyword).empty()) {
    throw std::invalid_argument("keyword search needs a non-empty seed keyword");
  }
  Harvest harvest(OperatorId::Keyword, known, provider, ctx);
  state.candidate_tokens = rank_keyword_candidates(topk, state.seed_keyword);

  std::vector<std::string> queries;
  for (const auto& tok : state.candidate_tokens) {
    if (queries.size() >= ctx.max_new_keywords) break;
    std::string q = state.seed_keyword + " " + tok;
    if (!state.used_queries.contains(q)) queries.push_back(std::move(q));
  }
  for (const auto& q : queries) {
    if (!harvest.budget_left()) break;
    std::vector<std::string> urls;
    try {
      harvest.count_api_call();
      state.used_queries.insert(q);
      urls = provider.keyword_search(q, ctx.keyword_limit);
    } catch (const ProviderError& e) {
      return harvest.fail(e.what());
    }
    if (urls.size() > ctx.keyword_limit) urls.resize(ctx.keyword_limit);
    harvest.take(urls);
  }
  return harvest.finish();
}

DiscoveryResult related_search(std::span<const WebsiteRecord> topk, const SiteSet& known,
                               SearchProvider& provider, const OperatorContext& ctx) {
  Harvest harvest(OperatorId::Related, known, provider, ctx);
  for (const auto& site : topk) {
    if (!harvest.budget_left()) break;
    std::vector<std::string> urls;
    try {
      harvest.count_api_call();
      urls = provider.related_search(normalize_site_key(site.best_page.url), ctx.related_limit);
    } catch (const ProviderError& e) {
      return harvest.fail(e.what());
    }
    if (urls.size() > ctx.related_limit) urls.resize(ctx.related_limit);
    harvest.take(urls);
  }
  return harvest.finish();
}

DiscoveryResult run_operator(OperatorId op, std::span<const WebsiteRecord> topk,
                             const SiteSet& known, SearchProvider& provider, KeywordState& state,
                             const OperatorContext& ctx) {
  switch (op) {
    case OperatorId::Forward: return forward_crawl(topk, known, provider, ctx);
    case OperatorId::Backward: return backward_crawl(topk, known, provider, ctx);
    case OperatorId::Keyword: return keyword_search(topk, known, provider, state, ctx);
    case OperatorId::Related: return related_search(topk, known, provider, ctx);
  }
  throw std::invalid_argument("unknown operator");
}

}  // namespace disco
