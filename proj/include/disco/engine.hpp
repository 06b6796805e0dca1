#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "disco/bandit.hpp"
#include "disco/eval.hpp"
#include "disco/operators.hpp"
#include "disco/ranking.hpp"

namespace disco {

struct EngineConfig {
  std::vector<WebsiteRecord> seeds;  // fetched seed pages
  std::string seed_keyword;
  std::size_t k = 20;
  std::size_t page_budget_total = 50000;
  std::size_t per_iteration_page_budget = 500;
  RankerId ranker = RankerId::Ensemble;
  std::size_t keyword_limit = 50;
  std::size_t related_limit = 50;
  std::size_t backlink_limit = 5;
  std::size_t max_new_keywords = 20;
  std::uint64_t rng_seed = 0;
  std::optional<OperatorId> fixed_operator;  // empty = bandit
  std::size_t rerank_window = 0;             // 0 = rank every result
  std::size_t workers = 1;
  std::size_t empty_cycle = 4;  // consecutive empty rounds that end a run
  bool use_meta = true;
  double bs_c = 2.0;
  std::shared_ptr<const Tokenizer> tokenizer;  // for fetched pages; default when null

  /// Throws ConfigError.
  void validate() const;
};

struct IterationLog {
  std::uint32_t iteration = 0;
  OperatorId op = OperatorId::Forward;
  std::size_t new_sites = 0;
  std::size_t pages_fetched = 0;
  std::size_t pages_total = 0;
  std::size_t api_calls = 0;
  std::size_t fetch_failures = 0;
  bool unavailable = false;
  double reward = 0.0;
  std::size_t cumulative_sites = 0;
  std::array<double, 4> scores{};  // UCB scores when the operator was chosen

  bool operator==(const IterationLog&) const = default;
};

/// Discovered websites in discovery order with a site_key index.
class ResultSet {
 public:
  std::span<const WebsiteRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool contains(const std::string& site_key) const { return index_.contains(site_key); }
  const WebsiteRecord* find(const std::string& site_key) const;

  /// Appends a new record or replaces best_page/best_score when `record`
  /// scores higher. Provenance of existing records never changes.
  /// Returns true when the site was new.
  bool upsert(const WebsiteRecord& record);

  bool operator==(const ResultSet& o) const { return records_ == o.records_; }

 private:
  std::vector<WebsiteRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Mean cosine similarity of a page to the seed pages over raw token counts.
class SeedSimilarity {
 public:
  SeedSimilarity(std::span<const WebsiteRecord> seeds, bool use_meta);
  double operator()(const PageDoc& page) const;

 private:
  std::unordered_map<std::string, double> counts(const PageDoc& page) const;

  std::vector<std::unordered_map<std::string, double>> seeds_;
  std::vector<double> norms_;
  bool use_meta_;
};

/// Union keyed by site_key; incoming records get best_score from `score`.
/// Returns one novelty flag per incoming website.
std::vector<bool> merge(ResultSet& results, const DiscoveryResult& incoming,
                        const std::function<double(const PageDoc&)>& score);

struct DiscoveryState {
  ResultSet results;
  RankedList ranked;
  std::vector<std::string> topk;  // site keys; empty means the seeds
  OperatorStats stats;
  KeywordState keyword_state;
  std::size_t pages_fetched_total = 0;
  std::uint32_t iteration = 0;
  std::size_t empty_streak = 0;
  std::uint8_t empty_mask = 0;  // operators that came back empty during the streak
  std::vector<IterationLog> log;
  bool finished = false;
  std::string stop_reason;

  bool operator==(const DiscoveryState&) const = default;
};

/// The discovery loop: select an operator, search from the current top-k,
/// merge, re-rank every result, feed the new top-k back.
class Engine {
 public:
  /// Throws ConfigError.
  Engine(EngineConfig config, SearchProvider& provider, NegativePool negatives);
  /// Continues from a checkpointed state.
  Engine(EngineConfig config, SearchProvider& provider, NegativePool negatives,
         DiscoveryState state);

  /// Runs one iteration. Returns false, doing nothing, once the run is finished.
  bool step();

  using Observer = std::function<void(const DiscoveryState&)>;
  /// Steps until finished or until `stop` returns true; `on_iteration` sees
  /// the state after every iteration.
  const DiscoveryState& run(const std::function<bool()>& stop = {},
                            const Observer& on_iteration = {});

  const DiscoveryState& state() const { return state_; }
  const EngineConfig& config() const { return config_; }
  std::vector<OperatorId> enabled_operators() const;
  /// Seeds plus every discovered site.
  SiteSet known_sites() const;

 private:
  void rerank();
  std::vector<WebsiteRecord> current_topk() const;

  EngineConfig config_;
  SearchProvider& provider_;
  NegativePool negatives_;
  SeedSimilarity page_score_;
  DiscoveryState state_;
};

/// Canonical snapshot text: {"schema_version", "checksum", "state"}, with the
/// checksum being the SHA-256 of the compact state dump.
std::string snapshot_json(const DiscoveryState& state);
DiscoveryState parse_snapshot(std::string_view text);
void checkpoint(const DiscoveryState& state, const std::string& path);
/// Throws CorruptSnapshot when the file is missing, malformed, or fails its checksum.
DiscoveryState resume(const std::string& path);

/// Discovery events for harvest series: each result with the run's page
/// total at the end of the iteration that found it.
std::vector<DiscoveryEvent> discovery_events(const DiscoveryState& state);
SiteSet discovered_sites(const DiscoveryState& state);

/// `iteration,operator,new_sites,pages_fetched,reward,cumulative_sites`
void write_iterations_csv(std::ostream& out, std::span<const IterationLog> log);
/// `iteration,operator,reward,score_forward,score_backward,score_keyword,score_related`
void write_bandit_csv(std::ostream& out, std::span<const IterationLog> log);
/// One JSON object per ranked site.
void write_ranked_jsonl(std::ostream& out, const DiscoveryState& state);

}  // namespace disco
