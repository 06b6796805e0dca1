#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "disco/operators.hpp"
#include "disco/ranking.hpp"

namespace disco {

/// Reachability class of a synthetic site. The first five are relevant.
enum class SiteClass : std::uint8_t { Forward, Backward, Keyword, Related, Mixed, Hub, Junk };

std::string_view to_string(SiteClass c);
std::optional<SiteClass> parse_site_class(std::string_view name);

enum class Label : std::uint8_t { Irrelevant, Relevant };

struct PartitionFractions {
  double forward = 0.2;
  double backward = 0.2;
  double keyword = 0.2;
  double related = 0.2;
  double mixed = 0.2;

  bool operator==(const PartitionFractions&) const = default;
};

struct SimWebSpec {
  std::uint64_t seed = 1;
  std::size_t n_relevant = 100;
  std::size_t n_irrelevant = 1900;  // hubs + junk
  std::size_t hub_count = 10;
  std::size_t n_seeds = 5;
  PartitionFractions partition;

  std::size_t n_domain_terms = 80;
  std::size_t n_meta_terms = 25;  // the domain terms used in metadata tags
  std::size_t n_noise_terms = 600;
  std::string seed_keyword;       // generated from the domain pool when empty

  std::size_t body_length = 120;
  double domain_fraction = 0.5;  // share of a relevant body drawn from the domain pool
  std::size_t meta_length = 5;

  std::size_t near_junk = 200;     // junk linked from the relevant region
  double spam_fraction = 1.0;      // near junk whose metadata carries the seed keyword
  std::size_t forward_degree = 5;  // links into the forward class
  std::size_t mixed_degree = 3;    // entry links into the mixed class
  std::size_t junk_degree = 12;    // links from relevant pages into near junk
  std::size_t hub_degree = 20;     // hub links into entry and backward sites
  std::size_t hub_junk_degree = 40;
  std::size_t hub_in_degree = 5;  // hub links into each entry and backward site
  std::size_t junk_link_degree = 8;  // junk to junk, at least 5
  std::size_t related_degree = 30;
  std::size_t related_junk = 10;

  bool operator==(const SimWebSpec&) const = default;
};

/// One synthetic site, represented by a single page.
struct SimPage {
  std::string url;
  std::string site_key;
  SiteClass site_class = SiteClass::Junk;
  bool seed = false;
  std::string title;
  std::vector<std::string> body;
  std::vector<std::string> meta;
  std::vector<std::string> outlinks;

  bool relevant() const {
    return site_class != SiteClass::Hub && site_class != SiteClass::Junk;
  }
  bool operator==(const SimPage&) const = default;
};

/// A generated web. Immutable after construction; safe to read concurrently.
class SimWeb {
 public:
  SimWeb() = default;
  /// Takes ownership of the pages and derives the indexes; validates the
  /// structure and throws SpecError when it is inconsistent.
  SimWeb(SimWebSpec spec, std::vector<SimPage> pages,
         std::map<std::string, std::vector<std::string>> related_map);

  const SimWebSpec& spec() const { return spec_; }
  std::span<const SimPage> pages() const { return pages_; }
  const SimPage* page_by_url(std::string_view url) const;
  const SimPage* page_by_site(std::string_view site_key) const;

  /// url -> urls linking to it, hubs first, then junk, then relevant pages.
  const std::map<std::string, std::vector<std::string>>& backlink_index() const {
    return backlinks_;
  }
  /// metadata term -> urls carrying it.
  const std::map<std::string, std::vector<std::string>>& keyword_index() const {
    return keyword_index_;
  }
  /// site_key -> related site urls.
  const std::map<std::string, std::vector<std::string>>& related_map() const { return related_; }

  const std::string& seed_keyword() const { return seed_keyword_; }
  std::vector<std::string> seed_urls() const;
  std::vector<std::string> seed_sites() const;
  /// Relevant site keys excluding the seeds.
  std::vector<std::string> coverage_universe() const;

  /// Throws UnknownSite.
  Label oracle_label(std::string_view site_key) const;

  /// Synthetic HTML for a page: title, metadata tags, body text, anchors.
  static std::string render(const SimPage& page);

  bool operator==(const SimWeb& other) const {
    return spec_ == other.spec_ && pages_ == other.pages_ && related_ == other.related_;
  }

 private:
  SimWebSpec spec_;
  std::string seed_keyword_;
  std::vector<SimPage> pages_;
  std::unordered_map<std::string, std::size_t> by_url_;
  std::unordered_map<std::string, std::size_t> by_site_;
  std::map<std::string, std::vector<std::string>> backlinks_;
  std::map<std::string, std::vector<std::string>> keyword_index_;
  std::map<std::string, std::vector<std::string>> related_;
};

/// Deterministic in spec.seed. Throws SpecError for infeasible specs.
SimWeb generate(const SimWebSpec& spec);

/// Validates without generating.
void validate(const SimWebSpec& spec);

/// Sizes of the five relevant classes (forward, backward, keyword, related,
/// mixed) by largest-remainder rounding.
std::array<std::size_t, 5> class_sizes(const SimWebSpec& spec);

/// SearchProvider over a SimWeb. Keyword search is conjunctive over metadata
/// terms and ranked by how often the query terms occur on the page.
class SimProvider : public SearchProvider {
 public:
  explicit SimProvider(const SimWeb& web) : web_(web) {}

  std::vector<std::string> keyword_search(std::string_view query, std::size_t limit) override;
  std::vector<std::string> backlink_search(std::string_view url, std::size_t limit) override;
  std::vector<std::string> related_search(std::string_view site_key, std::size_t limit) override;
  std::string fetch(std::string_view url) override;

 private:
  const SimWeb& web_;
};

/// Seed records: each seed page parsed exactly as a fetch would return it.
std::vector<WebsiteRecord> seed_records(const SimWeb& web);

/// `count` irrelevant pages sampled deterministically (hubs excluded).
NegativePool negative_pool(const SimWeb& web, std::size_t count, std::uint64_t seed);

}  // namespace disco
