#include <gtest/gtest.h>

#include <set>

#include "disco/error.hpp"
#include "disco/operators.hpp"
#include "support.hpp"

using namespace disco;
using test::FakeProvider;
using test::Rng;

namespace {

std::set<std::string> keys(const DiscoveryResult& r) {
  std::set<std::string> out;
  for (const auto& w : r.websites) out.insert(w.site_key);
  return out;
}

WebsiteRecord site(const std::string& url, std::vector<std::string> meta = {}) {
  return test::make_record(test::make_page(url, {"body"}, std::move(meta)));
}

/// Provider that ignores the limit, to check operators enforce it themselves.
class Flood : public FakeProvider {
 public:
  std::vector<std::size_t> limits;
  std::vector<std::string> keyword_search(std::string_view q, std::size_t limit) override {
    limits.push_back(limit);
    queries.emplace_back(q);
    return many("k");
  }
  std::vector<std::string> related_search(std::string_view s, std::size_t limit) override {
    limits.push_back(limit);
    related_queries.emplace_back(s);
    return many("r");
  }
  std::vector<std::string> backlink_search(std::string_view u, std::size_t limit) override {
    limits.push_back(limit);
    backlink_queries.emplace_back(u);
    return many("h");
  }

 private:
  std::vector<std::string> many(const std::string& prefix) {
    std::vector<std::string> out;
    for (int i = 0; i < 80; ++i) {
      const auto url = "http://" + prefix + std::to_string(i) + ".test/";
      out.push_back(url);
      pages[url] = test::html_page({"x"});
    }
    return out;
  }
};

}  // namespace

TEST(OperatorsForward, Examples) {
  FakeProvider p;
  p.pages["http://seed.com/"] = test::html_page({"a"}, {"http://known.com/", "http://new.com/x"});
  p.pages["http://known.com/"] = test::html_page({"k"});
  p.pages["http://new.com/x"] = test::html_page({"n"});
  p.pages["http://lonely.com/"] = test::html_page({"l"});
  p.pages["http://other.com/"] = test::html_page({"o"}, {"http://new.com/x"});
  const SiteSet known = {"seed.com", "known.com", "lonely.com", "other.com"};
  OperatorContext ctx;

  auto r = forward_crawl(std::vector{site("http://seed.com/")}, known, p, ctx);
  EXPECT_EQ(keys(r), (std::set<std::string>{"new.com"}));
  EXPECT_EQ(r.op, OperatorId::Forward);
  EXPECT_EQ(r.websites[0].discovered_by, OperatorId::Forward);
  EXPECT_EQ(r.websites[0].best_page.url, "http://new.com/x");

  r = forward_crawl(std::vector{site("http://lonely.com/")}, known, p, ctx);
  EXPECT_TRUE(r.websites.empty());
  EXPECT_GE(r.pages_fetched, 1u);

  r = forward_crawl(std::vector{site("http://seed.com/"), site("http://other.com/")}, known, p, ctx);
  EXPECT_EQ(r.websites.size(), 1u);
}

TEST(OperatorsForward, FetchFailuresAreCounted) {
  FakeProvider p;
  p.pages["http://seed.com/"] = test::html_page({"a"}, {"http://dead.com/", "http://live.com/"});
  p.pages["http://live.com/"] = test::html_page({"b"});
  const auto r = forward_crawl(std::vector{site("http://seed.com/"), site("http://gone.com/")},
                               SiteSet{"seed.com", "gone.com"}, p, OperatorContext{});
  EXPECT_EQ(keys(r), (std::set<std::string>{"live.com"}));
  EXPECT_EQ(r.fetch_failures, 2u);
  EXPECT_EQ(r.pages_fetched, 4u);
}

TEST(OperatorsBackward, Examples) {
  FakeProvider p;
  p.backlinks["http://seed.com/"] = {"http://hub.org/list"};
  p.pages["http://hub.org/list"] = test::html_page({"hub"}, {"http://seed.com/", "http://fresh.com/"});
  p.pages["http://fresh.com/"] = test::html_page({"f"});
  OperatorContext ctx;
  auto r = backward_crawl(std::vector{site("http://seed.com/")}, SiteSet{"seed.com"}, p, ctx);
  EXPECT_EQ(keys(r), (std::set<std::string>{"fresh.com"}));
  EXPECT_EQ(r.api_calls, 1u);

  r = backward_crawl(std::vector{site("http://nolinks.com/")}, SiteSet{}, p, ctx);
  EXPECT_TRUE(r.websites.empty());

  p.searches_fail = true;
  r = backward_crawl(std::vector{site("http://seed.com/")}, SiteSet{"seed.com"}, p, ctx);
  EXPECT_TRUE(r.unavailable);
  EXPECT_TRUE(r.websites.empty());
  EXPECT_FALSE(r.error.empty());
}

TEST(OperatorsBackward, HubLimit) {
  Flood p;
  OperatorContext ctx;
  ctx.backlink_limit = 5;
  const auto r = backward_crawl(std::vector{site("http://seed.com/"), site("http://two.com/")},
                                SiteSet{"seed.com", "two.com"}, p, ctx);
  std::size_t hubs = 0;
  for (const auto& u : p.fetched) hubs += u.rfind("http://h", 0) == 0;
  // Both inputs get the same hub list; each hub is fetched once.
  EXPECT_EQ(hubs, 5u);
  for (const auto l : p.limits) EXPECT_EQ(l, 5u);
  EXPECT_TRUE(r.websites.empty());
}

TEST(OperatorsKeyword, Examples) {
  FakeProvider p;
  p.keyword["gun forum pistol"] = {"http://pistols.com/", "http://known.com/"};
  p.pages["http://pistols.com/"] = test::html_page({"p"});
  KeywordState state;
  state.seed_keyword = "gun forum";
  const std::vector<WebsiteRecord> topk = {site("http://a.com/", {"pistol", "gun", "texas"}),
                                           site("http://b.com/", {"pistol"})};
  OperatorContext ctx;
  auto r = keyword_search(topk, SiteSet{"a.com", "b.com", "known.com"}, p, state, ctx);
  ASSERT_FALSE(p.queries.empty());
  EXPECT_EQ(p.queries[0], "gun forum pistol");
  EXPECT_EQ(p.queries, (std::vector<std::string>{"gun forum pistol", "gun forum texas"}));
  EXPECT_EQ(keys(r), (std::set<std::string>{"pistols.com"}));
  EXPECT_EQ(state.used_queries.size(), 2u);
  EXPECT_EQ(state.candidate_tokens, (std::vector<std::string>{"pistol", "texas"}));

  // Every candidate token used: no search calls.
  r = keyword_search(topk, SiteSet{"a.com", "b.com"}, p, state, ctx);
  EXPECT_TRUE(r.websites.empty());
  EXPECT_EQ(r.api_calls, 0u);
  EXPECT_EQ(p.queries.size(), 2u);

  KeywordState blank;
  EXPECT_THROW(keyword_search(topk, SiteSet{}, p, blank, ctx), std::invalid_argument);
}

TEST(OperatorsKeyword, Limits) {
  Flood p;
  KeywordState state;
  state.seed_keyword = "violin";
  std::vector<std::string> meta;
  for (int i = 0; i < 30; ++i) meta.push_back("tok" + std::to_string(i));
  OperatorContext ctx;
  ctx.page_budget = 100000;
  const auto r = keyword_search(std::vector{site("http://a.com/", meta)}, SiteSet{}, p, state, ctx);
  EXPECT_EQ(p.queries.size(), 20u);
  for (const auto l : p.limits) EXPECT_EQ(l, 50u);
  // Every query returns the same 80 URLs; the first 50 are new once.
  EXPECT_EQ(r.websites.size(), 50u);
}

TEST(OperatorsRelated, Examples) {
  FakeProvider p;
  p.related["example.com"] = {"http://known.com/", "http://known.com/other"};
  OperatorContext ctx;
  auto r = related_search(std::vector{site("http://www.example.com/path.html")}, SiteSet{"example.com", "known.com"},
                          p, ctx);
  EXPECT_EQ(p.related_queries, (std::vector<std::string>{"example.com"}));
  EXPECT_TRUE(r.websites.empty());

  Flood flood;
  r = related_search(std::vector{site("http://example.com/")}, SiteSet{"example.com"}, flood, ctx);
  EXPECT_EQ(r.websites.size(), 50u);
  EXPECT_EQ(flood.limits, (std::vector<std::size_t>{50}));
}

TEST(OperatorsKeyword, CandidateTokenOrder) {
  const std::vector<WebsiteRecord> pages = {site("http://a.com/", {"zeta", "alpha", "gun"}),
                                            site("http://b.com/", {"zeta", "beta"})};
  EXPECT_EQ(rank_keyword_candidates(pages, "gun forum"), (std::vector<std::string>{"zeta", "alpha", "beta"}));
}

// --- properties -----------------------------------------------------------------

namespace {

/// A random little web: sites with outlinks, backlinks, related lists and meta.
struct RandomWeb {
  FakeProvider provider;
  std::vector<std::string> urls;
};

void build_web(Rng& rng, RandomWeb& web) {
  const std::size_t n = rng.between(3, 40);
  for (std::size_t i = 0; i < n; ++i) web.urls.push_back("http://" + test::key(i) + "/p");
  const std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta", "eps"};
  for (const auto& u : web.urls) {
    std::vector<std::string> links, meta;
    for (std::size_t j = rng.below(6); j > 0; --j) links.push_back(web.urls[rng.below(n)]);
    for (std::size_t j = rng.below(4); j > 0; --j) meta.push_back(vocab[rng.below(vocab.size())]);
    if (rng.coin(0.9)) web.provider.pages[u] = test::html_page({"w"}, links, meta);
    for (std::size_t j = rng.below(4); j > 0; --j) web.provider.backlinks[u].push_back(web.urls[rng.below(n)]);
    const auto key = normalize_site_key(u);
    for (std::size_t j = rng.below(8); j > 0; --j) web.provider.related[key].push_back(web.urls[rng.below(n)]);
  }
  for (const auto& w : vocab) {
    for (std::size_t j = rng.below(10); j > 0; --j) web.provider.keyword["seed " + w].push_back(web.urls[rng.below(n)]);
  }
}

}  // namespace

TEST(OperatorsProperty, NoveltyBudgetAndDeterminism) {
  Rng rng(41);
  for (int inst = 0; inst < 300; ++inst) {
    RandomWeb web;
    build_web(rng, web);
    std::vector<WebsiteRecord> topk;
    SiteSet known;
    for (const auto& u : web.urls) {
      if (rng.coin(0.3)) {
        auto it = web.provider.pages.find(u);
        topk.push_back(it == web.provider.pages.end() ? site(u) : test::make_record(parse_page(u, it->second)));
      }
      if (rng.coin(0.4)) known.insert(normalize_site_key(u));
    }
    if (topk.empty()) topk.push_back(site(web.urls[0]));
    for (const auto& t : topk) known.insert(t.site_key);
    OperatorContext ctx;
    ctx.page_budget = rng.between(1, 30);
    ctx.workers = rng.coin() ? 1 : 3;
    const auto op = kOperators[rng.below(4)];
    KeywordState s1{"seed", {}, {}}, s2{"seed", {}, {}};
    const auto a = run_operator(op, topk, known, web.provider, s1, ctx);
    ctx.workers = 1;
    const auto b = run_operator(op, topk, known, web.provider, s2, ctx);
    EXPECT_EQ(a.websites, b.websites);
    EXPECT_EQ(a.pages_fetched, b.pages_fetched);
    EXPECT_EQ(s1, s2);
    EXPECT_LE(a.pages_fetched, ctx.page_budget);
    EXPECT_GE(a.pages_fetched, a.websites.size());
    std::set<std::string> distinct;
    for (const auto& w : a.websites) {
      EXPECT_FALSE(known.contains(w.site_key)) << w.site_key;
      EXPECT_TRUE(distinct.insert(w.site_key).second);
      EXPECT_EQ(w.discovered_by, op);
    }
    if (op == OperatorId::Keyword) {
      ctx.page_budget = 1000;
      // The budget may have cut the first call short; the third call finds nothing new.
      run_operator(op, topk, known, web.provider, s1, ctx);
      const auto third = run_operator(op, topk, known, web.provider, s1, ctx);
      EXPECT_EQ(third.api_calls, 0u);
      EXPECT_TRUE(third.websites.empty());
    }
  }
}

TEST(OperatorsProperty, KeywordExhaustion) {
  Rng rng(42);
  for (int inst = 0; inst < 200; ++inst) {
    RandomWeb web;
    build_web(rng, web);
    std::vector<WebsiteRecord> topk;
    for (const auto& [u, html] : web.provider.pages) {
      if (rng.coin(0.3)) topk.push_back(test::make_record(parse_page(u, html)));
    }
    KeywordState state{"seed", {}, {}};
    OperatorContext ctx;
    ctx.page_budget = 100000;
    const SiteSet known;
    keyword_search(topk, known, web.provider, state, ctx);
    const auto second = keyword_search(topk, known, web.provider, state, ctx);
    EXPECT_TRUE(second.websites.empty());
    EXPECT_EQ(second.api_calls, 0u);
  }
}
