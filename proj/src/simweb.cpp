#include "disco/simweb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "disco/error.hpp"
#include "rng_util.hpp"

namespace disco {

namespace detail {

std::vector<std::string> make_words(std::size_t n, std::mt19937_64& rng,
                                    std::unordered_set<std::string>& taken) {
  static constexpr std::string_view kOnsets = "bdfgklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  const auto& stop = default_stopwords();
  std::vector<std::string> words;
  words.reserve(n);
  while (words.size() < n) {
    const std::size_t syllables = 2 + below(rng, 2);
    std::string w;
    for (std::size_t s = 0; s < syllables; ++s) {
      w += kOnsets[below(rng, kOnsets.size())];
      w += kVowels[below(rng, kVowels.size())];
    }
    if (below(rng, 3) == 0) w += kOnsets[below(rng, kOnsets.size())];
    if (stop.contains(w) || !taken.insert(w).second) continue;
    words.push_back(std::move(w));
  }
  return words;
}

}  // namespace detail

using detail::below;
using detail::sample_indices;
using detail::shuffle;

std::string_view to_string(SiteClass c) {
  switch (c) {
    case SiteClass::Forward: return "forward";
    case SiteClass::Backward: return "backward";
    case SiteClass::Keyword: return "keyword";
    case SiteClass::Related: return "related";
    case SiteClass::Mixed: return "mixed";
    case SiteClass::Hub: return "hub";
    case SiteClass::Junk: return "junk";
  }
  return "junk";
}

std::optional<SiteClass> parse_site_class(std::string_view name) {
  for (const auto c : {SiteClass::Forward, SiteClass::Backward, SiteClass::Keyword,
                       SiteClass::Related, SiteClass::Mixed, SiteClass::Hub, SiteClass::Junk}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::array<std::size_t, 5> class_sizes(const SimWebSpec& spec) {
  const auto& p = spec.partition;
  const std::array<double, 5> f = {p.forward, p.backward, p.keyword, p.related, p.mixed};
  std::array<std::size_t, 5> sizes{};
  std::array<double, 5> rem{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    const double exact = f[i] * static_cast<double>(spec.n_relevant);
    sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::array<std::size_t, 5> order = {0, 1, 2, 3, 4};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b] + 1e-12; });
  for (std::size_t i = 0; assigned < spec.n_relevant; i = (i + 1) % 5) {
    if (f[order[i]] > 0) {
      ++sizes[order[i]];
      ++assigned;
    }
  }
  return sizes;
}

void validate(const SimWebSpec& spec) {
  const auto& p = spec.partition;
  const std::array<double, 5> f = {p.forward, p.backward, p.keyword, p.related, p.mixed};
  double total = 0;
  for (const double x : f) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw SpecError("partition fractions must be >= 0");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw SpecError("partition fractions must sum to 1");
  if (spec.n_relevant < f.size()) throw SpecError("n_relevant must be at least 5");
  if (spec.n_seeds == 0 || spec.n_seeds >= spec.n_relevant) {
    throw SpecError("n_seeds must be in [1, n_relevant)");
  }
  if (spec.hub_count >= spec.n_irrelevant) throw SpecError("hub_count must be < n_irrelevant");
  if (p.backward > 0 && spec.hub_count == 0) throw SpecError("backward class needs hubs");
  if (spec.hub_count > 0 && spec.hub_count < spec.hub_in_degree) {
    throw SpecError("hub_count must be at least hub_in_degree");
  }
  const std::size_t junk = spec.n_irrelevant - spec.hub_count;
  if (junk < 6) throw SpecError("need at least 6 junk sites");
  if (spec.near_junk > junk) throw SpecError("near_junk exceeds the junk sites");
  if (spec.junk_link_degree < 5) throw SpecError("junk_link_degree must be at least 5");
  if (spec.n_meta_terms < spec.meta_length || spec.meta_length == 0) {
    throw SpecError("meta_length must be in [1, n_meta_terms]");
  }
  if (spec.seed_keyword.empty() ? spec.n_domain_terms < spec.n_meta_terms + 2
                                : tokenize(spec.seed_keyword).empty()) {
    throw SpecError("seed keyword cannot be formed");
  }
  if (spec.n_noise_terms < 10) throw SpecError("n_noise_terms must be at least 10");
  if (spec.body_length < 5) throw SpecError("body_length must be at least 5");
  if (!(spec.domain_fraction >= 0.0 && spec.domain_fraction <= 1.0)) {
    throw SpecError("domain_fraction must be in [0, 1]");
  }
  if (!(spec.spam_fraction >= 0.0 && spec.spam_fraction <= 1.0)) {
    throw SpecError("spam_fraction must be in [0, 1]");
  }
  // Spam pages carry the keyword tokens plus two metadata terms; irrelevant
  // pages must stay at least 95% noise.
  const std::size_t kw_tokens =
      spec.seed_keyword.empty() ? 2 : tokenize(spec.seed_keyword).size();
  if (spec.spam_fraction > 0 && spec.near_junk > 0 && spec.body_length < 20 * (kw_tokens + 2)) {
    throw SpecError("body_length too short for spam pages to stay 95% noise");
  }
  const auto sizes = class_sizes(spec);
  for (std::size_t i = 0; i < 5; ++i) {
    if (f[i] > 0 && sizes[i] == 0) throw SpecError("a partition class rounds to zero sites");
  }
}

// --- SimWeb -----------------------------------------------------------------

namespace {

int backlink_rank(SiteClass c) {
  if (c == SiteClass::Hub) return 0;
  if (c == SiteClass::Junk) return 1;
  return 2;
}

std::string join(const std::vector<std::string>& words, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += sep;
    out += words[i];
  }
  return out;
}

}  // namespace

SimWeb::SimWeb(SimWebSpec spec, std::vector<SimPage> pages,
               std::map<std::string, std::vector<std::string>> related_map)
    : spec_(std::move(spec)), pages_(std::move(pages)), related_(std::move(related_map)) {
  seed_keyword_ = spec_.seed_keyword;
  if (tokenize(seed_keyword_).empty()) throw SpecError("simweb has no usable seed keyword");
  for (std::size_t i = 0; i < pages_.size(); ++i) {
    const auto& p = pages_[i];
    std::string key;
    try {
      key = normalize_site_key(p.url);
    } catch (const MalformedUrl& e) {
      throw SpecError(std::string("bad page url: ") + e.what());
    }
    if (key != p.site_key) throw SpecError("site_key mismatch for " + p.url);
    if (!by_url_.emplace(p.url, i).second) throw SpecError("duplicate url " + p.url);
    if (!by_site_.emplace(p.site_key, i).second) throw SpecError("duplicate site " + p.site_key);
  }
  for (const auto& p : pages_) {
    for (const auto& link : p.outlinks) {
      if (!by_url_.contains(link)) throw SpecError("dangling link " + link);
      backlinks_[link].push_back(p.url);
    }
    std::vector<std::string> terms = p.meta;
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    for (const auto& t : terms) keyword_index_[t].push_back(p.url);
  }
  for (auto& [url, sources] : backlinks_) {
    std::sort(sources.begin(), sources.end(), [&](const std::string& a, const std::string& b) {
      const int ra = backlink_rank(pages_[by_url_.at(a)].site_class);
      const int rb = backlink_rank(pages_[by_url_.at(b)].site_class);
      return ra != rb ? ra < rb : a < b;
    });
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  }
  for (const auto& [key, urls] : related_) {
    if (!by_site_.contains(key)) throw SpecError("related map key is not a site: " + key);
    for (const auto& u : urls) {
      if (!by_url_.contains(u)) throw SpecError("related map lists unknown url " + u);
    }
  }
}

const SimPage* SimWeb::page_by_url(std::string_view url) const {
  const auto it = by_url_.find(std::string(url));
  return it == by_url_.end() ? nullptr : &pages_[it->second];
}

const SimPage* SimWeb::page_by_site(std::string_view site_key) const {
  const auto it = by_site_.find(std::string(site_key));
  return it == by_site_.end() ? nullptr : &pages_[it->second];
}

std::vector<std::string> SimWeb::seed_urls() const {
  std::vector<std::string> out;
  for (const auto& p : pages_) {
    if (p.seed) out.push_back(p.url);
  }
  return out;
}

std::vector<std::string> SimWeb::seed_sites() const {
  std::vector<std::string> out;
  for (const auto& p : pages_) {
    if (p.seed) out.push_back(p.site_key);
  }
  return out;
}

std::vector<std::string> SimWeb::coverage_universe() const {
  std::vector<std::string> out;
  for (const auto& p : pages_) {
    if (p.relevant() && !p.seed) out.push_back(p.site_key);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Label SimWeb::oracle_label(std::string_view site_key) const {
  const auto* p = page_by_site(site_key);
  if (p == nullptr) throw UnknownSite("unknown site " + std::string(site_key));
  return p->relevant() ? Label::Relevant : Label::Irrelevant;
}

std::string SimWeb::render(const SimPage& page) {
  const std::size_t half = page.meta.size() / 2;
  const std::vector<std::string> description(page.meta.begin(),
                                             page.meta.begin() + static_cast<long>(half));
  const std::vector<std::string> keywords(page.meta.begin() + static_cast<long>(half),
                                          page.meta.end());
  std::string html = "<html><head><title>" + page.title + "</title>\n";
  html += "<meta name=\"description\" content=\"" + join(description, " ") + "\">\n";
  html += "<meta name=\"keywords\" content=\"" + join(keywords, ", ") + "\">\n";
  html += "</head><body>\n<p>" + join(page.body, " ") + "</p>\n";
  for (const auto& link : page.outlinks) html += "<a href=\"" + link + "\"></a>\n";
  html += "</body></html>\n";
  return html;
}

// --- generation -------------------------------------------------------------

SimWeb generate(const SimWebSpec& input) {
  validate(input);
  SimWebSpec spec = input;
  std::mt19937_64 rng(spec.seed);

  std::unordered_set<std::string> taken;
  const auto domain = detail::make_words(spec.n_domain_terms, rng, taken);
  const auto noise = detail::make_words(spec.n_noise_terms, rng, taken);
  if (spec.seed_keyword.empty()) {
    spec.seed_keyword = domain[spec.n_meta_terms] + " " + domain[spec.n_meta_terms + 1];
  }
  const auto kw_tokens = tokenize(spec.seed_keyword);
  std::vector<std::string> meta_pool;
  for (std::size_t i = 0; i < spec.n_meta_terms; ++i) {
    if (std::find(kw_tokens.begin(), kw_tokens.end(), domain[i]) == kw_tokens.end()) {
      meta_pool.push_back(domain[i]);
    }
  }
  if (meta_pool.size() < spec.meta_length) throw SpecError("metadata pool too small");

  // Sites, in class order; hosts are a random permutation so names carry no class.
  const auto sizes = class_sizes(spec);
  const std::size_t n_sites = spec.n_relevant + spec.n_irrelevant;
  std::vector<std::size_t> host_ids(n_sites);
  std::iota(host_ids.begin(), host_ids.end(), std::size_t{0});
  shuffle(host_ids, rng);

  std::vector<SimPage> pages(n_sites);
  std::array<std::vector<std::size_t>, 7> members;
  {
    std::size_t i = 0;
    const auto add = [&](SiteClass c, std::size_t count) {
      for (std::size_t j = 0; j < count; ++j, ++i) {
        char host[32];
        std::snprintf(host, sizeof host, "s%05zu.sim", host_ids[i]);
        pages[i].site_key = host;
        pages[i].url = std::string("http://") + host + "/";
        pages[i].site_class = c;
        members[static_cast<std::size_t>(c)].push_back(i);
      }
    };
    add(SiteClass::Forward, sizes[0]);
    add(SiteClass::Backward, sizes[1]);
    add(SiteClass::Keyword, sizes[2]);
    add(SiteClass::Related, sizes[3]);
    add(SiteClass::Mixed, sizes[4]);
    add(SiteClass::Hub, spec.hub_count);
    add(SiteClass::Junk, spec.n_irrelevant - spec.hub_count);
  }
  const auto& fwd = members[0];
  const auto& bwd = members[1];
  const auto& rel = members[3];
  const auto& mixed = members[4];
  const auto& hubs = members[5];
  const auto& junk = members[6];
  const std::vector<std::size_t> near(junk.begin(),
                                      junk.begin() + static_cast<long>(spec.near_junk));

  // Seeds come from the mixed class when it is large enough, otherwise
  // round-robin over the relevant classes.
  std::vector<std::size_t> seeds;
  if (mixed.size() >= spec.n_seeds) {
    seeds.assign(mixed.begin(), mixed.begin() + static_cast<long>(spec.n_seeds));
  } else {
    std::array<std::size_t, 5> next{};
    for (std::size_t c = 0; seeds.size() < spec.n_seeds; c = (c + 1) % 5) {
      if (next[c] < members[c].size()) seeds.push_back(members[c][next[c]++]);
    }
  }
  for (const auto s : seeds) pages[s].seed = true;
  std::vector<std::size_t> entry = seeds;
  for (const auto m : mixed) {
    if (!pages[m].seed) entry.push_back(m);
  }
  std::vector<bool> is_entry(n_sites, false);
  for (const auto e : entry) is_entry[e] = true;

  // Content.
  const auto pick = [&](const std::vector<std::string>& pool) -> const std::string& {
    return pool[below(rng, pool.size())];
  };
  const auto noise_words = [&](std::size_t n) {
    std::vector<std::string> w;
    w.reserve(n);
    for (std::size_t i = 0; i < n; ++i) w.push_back(pick(noise));
    return w;
  };
  const auto meta_terms = [&](std::size_t n) {
    std::vector<std::string> w;
    for (const auto i : sample_indices(meta_pool.size(), n, rng)) w.push_back(meta_pool[i]);
    return w;
  };
  const std::size_t n_spam = static_cast<std::size_t>(
      std::llround(spec.spam_fraction * static_cast<double>(spec.near_junk)));
  for (std::size_t i = 0; i < n_sites; ++i) {
    auto& p = pages[i];
    if (p.relevant()) {
      const auto n_dom = std::min(
          spec.body_length,
          std::max<std::size_t>(5, static_cast<std::size_t>(std::llround(
                                       spec.domain_fraction * static_cast<double>(spec.body_length)))));
      for (std::size_t j = 0; j < n_dom; ++j) p.body.push_back(pick(domain));
      for (std::size_t j = n_dom; j < spec.body_length; ++j) p.body.push_back(pick(noise));
      shuffle(p.body, rng);
      p.meta = meta_terms(spec.meta_length);
      p.title = p.meta[0] + " " + p.meta[std::min<std::size_t>(1, p.meta.size() - 1)];
      if (is_entry[i] || p.site_class == SiteClass::Keyword) {
        p.meta.insert(p.meta.begin(), kw_tokens.begin(), kw_tokens.end());
      }
    } else {
      p.body = noise_words(spec.body_length);
      p.title = pick(noise) + " " + pick(noise);
      p.meta = noise_words(3);
    }
  }
  for (std::size_t j = 0; j < n_spam; ++j) {
    auto& p = pages[near[j]];
    p.meta = kw_tokens;
    for (auto& t : meta_terms(2)) p.meta.push_back(std::move(t));
  }

  // Links.
  std::vector<std::vector<std::size_t>> out(n_sites);
  const auto link = [&](std::size_t from, std::size_t to) {
    if (from != to && std::find(out[from].begin(), out[from].end(), to) == out[from].end()) {
      out[from].push_back(to);
    }
  };
  const auto link_sample = [&](std::size_t from, const std::vector<std::size_t>& pool,
                               std::size_t k) {
    for (const auto j : sample_indices(pool.size(), k, rng)) link(from, pool[j]);
  };
  for (const auto e : entry) {
    link_sample(e, fwd, spec.forward_degree);
    link_sample(e, mixed, spec.mixed_degree);
  }
  for (std::size_t j = 0; j < fwd.size(); ++j) link(entry[j % entry.size()], fwd[j]);
  {
    std::size_t j = 0;
    for (const auto m : mixed) {
      if (!pages[m].seed) link(seeds[j++ % seeds.size()], m);
    }
  }
  for (const auto f : fwd) {
    if (!is_entry[f]) link_sample(f, fwd, spec.forward_degree);
  }
  for (std::size_t i = 0; i < n_sites; ++i) {
    if (pages[i].relevant()) link_sample(i, near, spec.junk_degree);
  }
  if (!hubs.empty()) {
    std::vector<std::size_t> hub_targets = entry;
    for (const auto b : bwd) {
      if (!is_entry[b]) hub_targets.push_back(b);
    }
    for (const auto h : hubs) {
      link_sample(h, hub_targets, spec.hub_degree);
      link_sample(h, near, spec.hub_junk_degree);
    }
    // Enough hub in-links that a backlink query never reaches past the hubs.
    const std::size_t in_degree = std::min(spec.hub_in_degree, hubs.size());
    for (std::size_t j = 0; j < hub_targets.size(); ++j) {
      for (std::size_t d = 0; d < in_degree; ++d) link(hubs[(j + d) % hubs.size()], hub_targets[j]);
    }
  }
  // Every junk site gets at least five junk in-links, so a backlink query on a
  // junk page never has to fall back to relevant sources.
  for (std::size_t j = 0; j < junk.size(); ++j) {
    for (std::size_t d = 1; d <= 5; ++d) link(junk[j], junk[(j + d) % junk.size()]);
    link_sample(junk[j], junk, spec.junk_link_degree - 5);
  }
  for (std::size_t i = 0; i < n_sites; ++i) {
    shuffle(out[i], rng);
    for (const auto j : out[i]) pages[i].outlinks.push_back(pages[j].url);
  }

  // Relatedness: entry and related-class sites point at each other and at
  // some near junk.
  std::map<std::string, std::vector<std::string>> related;
  std::vector<std::size_t> related_region = entry;
  for (const auto r : rel) {
    if (!is_entry[r]) related_region.push_back(r);
  }
  for (const auto key : related_region) {
    std::vector<std::size_t> others;
    for (const auto r : related_region) {
      if (r != key) others.push_back(r);
    }
    std::vector<std::size_t> chosen;
    for (const auto j : sample_indices(others.size(), spec.related_degree, rng)) {
      chosen.push_back(others[j]);
    }
    for (const auto j : sample_indices(near.size(), spec.related_junk, rng)) {
      chosen.push_back(near[j]);
    }
    shuffle(chosen, rng);
    auto& urls = related[pages[key].site_key];
    for (const auto c : chosen) urls.push_back(pages[c].url);
  }

  return SimWeb(std::move(spec), std::move(pages), std::move(related));
}

// --- provider ---------------------------------------------------------------

std::vector<std::string> SimProvider::keyword_search(std::string_view query, std::size_t limit) {
  auto terms = tokenize(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  if (terms.empty()) return {};
  const auto& index = web_.keyword_index();
  std::vector<std::string> hits;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto it = index.find(terms[t]);
    if (it == index.end()) return {};
    std::vector<std::string> urls = it->second;
    std::sort(urls.begin(), urls.end());
    if (t == 0) {
      hits = std::move(urls);
    } else {
      std::vector<std::string> both;
      std::set_intersection(hits.begin(), hits.end(), urls.begin(), urls.end(),
                            std::back_inserter(both));
      hits = std::move(both);
    }
  }
  std::vector<std::pair<std::size_t, std::string>> scored;
  for (auto& url : hits) {
    const auto* p = web_.page_by_url(url);
    std::size_t tf = 0;
    for (const auto* tokens : {&p->body, &p->meta}) {
      for (const auto& tok : *tokens) {
        if (std::binary_search(terms.begin(), terms.end(), tok)) ++tf;
      }
    }
    scored.emplace_back(tf, std::move(url));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::string> result;
  for (std::size_t i = 0; i < scored.size() && i < limit; ++i) result.push_back(scored[i].second);
  return result;
}

std::vector<std::string> SimProvider::backlink_search(std::string_view url, std::size_t limit) {
  const auto& index = web_.backlink_index();
  const auto it = index.find(std::string(url));
  if (it == index.end()) return {};
  const auto n = std::min(limit, it->second.size());
  return {it->second.begin(), it->second.begin() + static_cast<long>(n)};
}

std::vector<std::string> SimProvider::related_search(std::string_view site_key,
                                                     std::size_t limit) {
  const auto& map = web_.related_map();
  const auto it = map.find(std::string(site_key));
  if (it == map.end()) return {};
  const auto n = std::min(limit, it->second.size());
  return {it->second.begin(), it->second.begin() + static_cast<long>(n)};
}

std::string SimProvider::fetch(std::string_view url) {
  const auto* p = web_.page_by_url(url);
  if (p == nullptr) throw NotFound("no such page: " + std::string(url));
  return SimWeb::render(*p);
}

std::vector<WebsiteRecord> seed_records(const SimWeb& web) {
  std::vector<WebsiteRecord> records;
  for (const auto& p : web.pages()) {
    if (!p.seed) continue;
    WebsiteRecord r;
    r.best_page = parse_page(p.url, SimWeb::render(p));
    r.site_key = r.best_page.site_key;
    records.push_back(std::move(r));
  }
  return records;
}

NegativePool negative_pool(const SimWeb& web, std::size_t count, std::uint64_t seed) {
  std::vector<const SimPage*> junk;
  for (const auto& p : web.pages()) {
    if (p.site_class == SiteClass::Junk) junk.push_back(&p);
  }
  std::mt19937_64 rng(seed);
  NegativePool pool;
  for (const auto i : sample_indices(junk.size(), count, rng)) {
    pool.pages.push_back(parse_page(junk[i]->url, SimWeb::render(*junk[i])));
  }
  return pool;
}

}  // namespace disco
