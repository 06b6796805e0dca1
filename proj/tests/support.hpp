#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "disco/corpus.hpp"
#include "disco/error.hpp"
#include "disco/operators.hpp"
#include "disco/ranking.hpp"

namespace disco::test {

/// Small deterministic generator; modulo draws keep results identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(gen_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  bool coin(double p = 0.5) { return unit() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 gen_;
};

inline std::string key(std::size_t i) { return "s" + std::to_string(i) + ".test"; }

inline RankedList ranked_from_keys(const std::vector<std::string>& keys,
                                   RankerId ranker = RankerId::Cosine) {
  RankedList l;
  l.ranker = ranker;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    l.items.push_back({keys[i], static_cast<double>(keys.size() - i)});
  }
  return l;
}

inline SparseVector random_vector(Rng& rng, std::size_t dim, std::size_t max_nnz,
                                  bool integer = true) {
  std::vector<SparseVector::Entry> e;
  const std::size_t nnz = rng.below(max_nnz + 1);
  for (std::size_t i = 0; i < nnz; ++i) {
    const double w = integer ? static_cast<double>(rng.between(1, 4)) : 0.1 + 3 * rng.unit();
    e.emplace_back(static_cast<TermId>(rng.below(dim)), w);
  }
  return SparseVector(std::move(e));
}

inline PageDoc make_page(const std::string& url, std::vector<std::string> body,
                         std::vector<std::string> meta = {},
                         std::vector<std::string> outlinks = {}) {
  PageDoc p;
  p.url = url;
  p.site_key = normalize_site_key(url);
  p.body_tokens = std::move(body);
  p.meta_tokens = std::move(meta);
  p.outlinks = std::move(outlinks);
  return p;
}

inline WebsiteRecord make_record(const PageDoc& page) {
  WebsiteRecord r;
  r.site_key = page.site_key;
  r.best_page = page;
  return r;
}

inline std::string html_page(const std::vector<std::string>& body,
                             const std::vector<std::string>& links = {},
                             const std::vector<std::string>& keywords = {}) {
  std::string h = "<html><head>";
  if (!keywords.empty()) {
    h += "<meta name=\"keywords\" content=\"";
    for (std::size_t i = 0; i < keywords.size(); ++i) h += (i ? ", " : "") + keywords[i];
    h += "\">";
  }
  h += "</head><body><p>";
  for (const auto& w : body) h += w + " ";
  h += "</p>";
  for (const auto& l : links) h += "<a href=\"" + l + "\">link</a>";
  return h + "</body></html>";
}

/// In-memory SearchProvider with call accounting.
class FakeProvider : public SearchProvider {
 public:
  std::map<std::string, std::vector<std::string>> keyword;
  std::map<std::string, std::vector<std::string>> backlinks;
  std::map<std::string, std::vector<std::string>> related;
  std::map<std::string, std::string> pages;
  bool searches_fail = false;

  std::vector<std::string> queries;
  std::vector<std::string> backlink_queries;
  std::vector<std::string> related_queries;
  std::vector<std::string> fetched;

  std::vector<std::string> keyword_search(std::string_view q, std::size_t limit) override {
    queries.emplace_back(q);
    return lookup(keyword, q, limit);
  }
  std::vector<std::string> backlink_search(std::string_view url, std::size_t limit) override {
    backlink_queries.emplace_back(url);
    return lookup(backlinks, url, limit);
  }
  std::vector<std::string> related_search(std::string_view site, std::size_t limit) override {
    related_queries.emplace_back(site);
    return lookup(related, site, limit);
  }
  std::string fetch(std::string_view url) override {
    {
      std::lock_guard lock(mutex_);
      fetched.emplace_back(url);
    }
    const auto it = pages.find(std::string(url));
    if (it == pages.end()) throw NotFound("no page " + std::string(url));
    return it->second;
  }

 private:
  std::vector<std::string> lookup(const std::map<std::string, std::vector<std::string>>& m,
                                  std::string_view k, std::size_t limit) const {
    if (searches_fail) throw ProviderError("quota exhausted");
    const auto it = m.find(std::string(k));
    if (it == m.end()) return {};
    std::vector<std::string> out = it->second;
    if (out.size() > limit) out.resize(limit);
    return out;
  }

  std::mutex mutex_;
};

}  // namespace disco::test
