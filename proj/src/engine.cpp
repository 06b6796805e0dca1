#include "disco/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "disco/error.hpp"
#include "disco/json_io.hpp"

namespace disco {

namespace {

constexpr int kSchemaVersion = 1;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint8_t bit(OperatorId op) { return static_cast<std::uint8_t>(1u << index_of(op)); }

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void EngineConfig::validate() const {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  try {
    SeedSet check(seeds);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (k == 0) throw ConfigError("k must be >= 1");
  if (page_budget_total == 0 || per_iteration_page_budget == 0) {
    throw ConfigError("page budgets must be >= 1");
  }
  if (keyword_limit == 0 || related_limit == 0 || backlink_limit == 0) {
    throw ConfigError("result limits must be >= 1");
  }
  if (max_new_keywords == 0) throw ConfigError("max_new_keywords must be >= 1");
  if (empty_cycle == 0) throw ConfigError("empty_cycle must be >= 1");
  if (workers == 0) throw ConfigError("workers must be >= 1");
  if (!(bs_c > 0)) throw ConfigError("bs_c must be positive");
  if (fixed_operator == OperatorId::Keyword && tokenize(seed_keyword).empty()) {
    throw ConfigError("the keyword operator needs a non-empty seed keyword");
  }
}

// --- ResultSet / merge ------------------------------------------------------

const WebsiteRecord* ResultSet::find(const std::string& site_key) const {
  const auto it = index_.find(site_key);
  return it == index_.end() ? nullptr : &records_[it->second];
}

bool ResultSet::upsert(const WebsiteRecord& record) {
  const auto [it, inserted] = index_.try_emplace(record.site_key, records_.size());
  if (inserted) {
    records_.push_back(record);
    return true;
  }
  auto& existing = records_[it->second];
  if (record.best_score > existing.best_score) {
    existing.best_page = record.best_page;
    existing.best_score = record.best_score;
  }
  return false;
}

SeedSimilarity::SeedSimilarity(std::span<const WebsiteRecord> seeds, bool use_meta)
    : use_meta_(use_meta) {
  for (const auto& s : seeds) {
    seeds_.push_back(counts(s.best_page));
    double n = 0;
    for (const auto& [t, c] : seeds_.back()) n += c * c;
    norms_.push_back(std::sqrt(n));
  }
}

std::unordered_map<std::string, double> SeedSimilarity::counts(const PageDoc& page) const {
  std::unordered_map<std::string, double> c;
  for (const auto& t : page.body_tokens) c[t] += 1;
  if (use_meta_) {
    for (const auto& t : page.meta_tokens) c[t] += 1;
  }
  return c;
}

double SeedSimilarity::operator()(const PageDoc& page) const {
  if (seeds_.empty()) return 0.0;
  const auto c = counts(page);
  double norm = 0;
  for (const auto& [t, v] : c) norm += v * v;
  norm = std::sqrt(norm);
  double total = 0;
  for (std::size_t s = 0; s < seeds_.size(); ++s) {
    if (norm == 0 || norms_[s] == 0) continue;
    double dot = 0;
    for (const auto& [t, v] : c) {
      if (const auto it = seeds_[s].find(t); it != seeds_[s].end()) dot += v * it->second;
    }
    total += std::clamp(dot / (norm * norms_[s]), 0.0, 1.0);
  }
  return total / static_cast<double>(seeds_.size());
}

std::vector<bool> merge(ResultSet& results, const DiscoveryResult& incoming,
                        const std::function<double(const PageDoc&)>& score) {
  std::vector<bool> novel;
  novel.reserve(incoming.websites.size());
  for (const auto& w : incoming.websites) {
    WebsiteRecord r = w;
    r.best_score = score(r.best_page);
    novel.push_back(results.upsert(r));
  }
  return novel;
}

// --- Engine -----------------------------------------------------------------

Engine::Engine(EngineConfig config, SearchProvider& provider, NegativePool negatives)
    : Engine(std::move(config), provider, std::move(negatives), DiscoveryState{}) {
  state_.keyword_state.seed_keyword = config_.seed_keyword;
}

Engine::Engine(EngineConfig config, SearchProvider& provider, NegativePool negatives,
               DiscoveryState state)
    : config_(std::move(config)),
      provider_(provider),
      negatives_(std::move(negatives)),
      page_score_((config_.validate(), config_.seeds), config_.use_meta),
      state_(std::move(state)) {
  const bool needs_negatives =
      config_.ranker == RankerId::Binomial || config_.ranker == RankerId::Ensemble;
  if (needs_negatives && negatives_.pages.size() < config_.seeds.size()) {
    throw ConfigError("negative pool has " + std::to_string(negatives_.pages.size()) +
                      " pages but the ranker needs " + std::to_string(config_.seeds.size()));
  }
}

std::vector<OperatorId> Engine::enabled_operators() const {
  if (config_.fixed_operator) return {*config_.fixed_operator};
  std::vector<OperatorId> ops;
  const bool keyword_ok = !tokenize(config_.seed_keyword).empty();
  for (const auto op : kOperators) {
    if (op != OperatorId::Keyword || keyword_ok) ops.push_back(op);
  }
  return ops;
}

SiteSet Engine::known_sites() const {
  SiteSet known;
  for (const auto& s : config_.seeds) known.insert(s.site_key);
  for (const auto& r : state_.results.records()) known.insert(r.site_key);
  return known;
}

std::vector<WebsiteRecord> Engine::current_topk() const {
  if (state_.topk.empty()) return config_.seeds;
  std::vector<WebsiteRecord> out;
  out.reserve(state_.topk.size());
  for (const auto& key : state_.topk) {
    if (const auto* r = state_.results.find(key)) out.push_back(*r);
  }
  return out;
}

void Engine::rerank() {
  const auto records = state_.results.records();
  std::size_t first = 0;
  if (config_.rerank_window > 0 && records.size() > config_.rerank_window) {
    first = records.size() - config_.rerank_window;
  }
  const auto candidates = records.subspan(first);
  if (candidates.empty()) {
    state_.ranked = RankedList{config_.ranker, {}};
    return;
  }
  Vocabulary vocab;
  for (const auto& s : config_.seeds) vocab.add_document(s.best_page, config_.use_meta);
  for (const auto& r : candidates) vocab.add_document(r.best_page, config_.use_meta);

  std::vector<SparseVector> seeds;
  for (const auto& s : config_.seeds) {
    seeds.push_back(vectorize(s.best_page, vocab, VectorMode::TermFrequency, config_.use_meta));
  }
  std::vector<RankingItem> items;
  items.reserve(candidates.size());
  for (const auto& r : candidates) {
    items.push_back(
        {r.site_key, vectorize(r.best_page, vocab, VectorMode::TermFrequency, config_.use_meta)});
  }
  std::vector<SparseVector> pool;
  for (const auto& p : negatives_.pages) {
    pool.push_back(vectorize(p, vocab, VectorMode::TermFrequency, config_.use_meta));
  }
  RankingOptions options;
  options.ranker = config_.ranker;
  options.use_meta = config_.use_meta;
  options.bs_c = config_.bs_c;
  options.rng_seed = splitmix64(config_.rng_seed ^ splitmix64(state_.iteration));
  state_.ranked = rank_items(items, seeds, pool, vocab, options);
}

bool Engine::step() {
  if (state_.finished) return false;
  const auto allowed = enabled_operators();

  IterationLog entry;
  entry.iteration = state_.iteration + 1;
  for (const auto op : kOperators) entry.scores[index_of(op)] = ucb_score(state_.stats, op);
  const OperatorId op = config_.fixed_operator ? *config_.fixed_operator
                                               : select_operator(state_.stats, allowed);
  entry.op = op;

  const auto topk = current_topk();
  OperatorContext ctx;
  ctx.page_budget = std::min(config_.per_iteration_page_budget,
                             config_.page_budget_total - state_.pages_fetched_total);
  ctx.backlink_limit = config_.backlink_limit;
  ctx.keyword_limit = config_.keyword_limit;
  ctx.related_limit = config_.related_limit;
  ctx.max_new_keywords = config_.max_new_keywords;
  ctx.workers = config_.workers;
  ctx.iteration = entry.iteration;
  ctx.tokenizer = config_.tokenizer.get();
  const auto known = known_sites();
  const auto result = run_operator(op, topk, known, provider_, state_.keyword_state, ctx);

  state_.pages_fetched_total += result.pages_fetched;
  const auto novel = merge(state_.results, result, std::cref(page_score_));
  state_.iteration = entry.iteration;
  rerank();
  state_.topk.clear();
  for (std::size_t i = 0; i < state_.ranked.size() && i < config_.k; ++i) {
    state_.topk.push_back(state_.ranked.items[i].site_key);
  }

  const auto positions = state_.ranked.positions();
  RewardReport report{op, {}};
  for (std::size_t i = 0; i < result.websites.size(); ++i) {
    const auto it = positions.find(result.websites[i].site_key);
    if (it == positions.end()) continue;  // outside the rerank window
    report.entries.push_back({it->first, it->second, state_.ranked.size(), novel[i]});
  }
  entry.reward = compute_reward(report);
  state_.stats = update(state_.stats, op, report);

  entry.new_sites = static_cast<std::size_t>(std::count(novel.begin(), novel.end(), true));
  entry.pages_fetched = result.pages_fetched;
  entry.pages_total = state_.pages_fetched_total;
  entry.api_calls = result.api_calls;
  entry.fetch_failures = result.fetch_failures;
  entry.unavailable = result.unavailable;
  entry.cumulative_sites = state_.results.size();
  state_.log.push_back(entry);

  if (entry.new_sites == 0) {
    ++state_.empty_streak;
    state_.empty_mask |= bit(op);
  } else {
    state_.empty_streak = 0;
    state_.empty_mask = 0;
  }
  std::uint8_t all = 0;
  for (const auto o : allowed) all |= bit(o);
  if (state_.pages_fetched_total >= config_.page_budget_total) {
    state_.finished = true;
    state_.stop_reason = "page budget reached";
  } else if (state_.empty_streak >= config_.empty_cycle && (state_.empty_mask & all) == all) {
    state_.finished = true;
    state_.stop_reason = "operators exhausted";
  }
  return true;
}

const DiscoveryState& Engine::run(const std::function<bool()>& stop,
                                  const Observer& on_iteration) {
  while (!state_.finished) {
    if (stop && stop()) {
      state_.stop_reason = "stopped";
      break;
    }
    step();
    if (on_iteration) on_iteration(state_);
  }
  return state_;
}

// --- snapshots ----------------------------------------------------------------

namespace {

json log_to_json(const IterationLog& e) {
  json scores = json::array();
  for (const double s : e.scores) scores.push_back(std::isinf(s) ? json(nullptr) : json(s));
  return json{{"iteration", e.iteration},
              {"operator", to_string(e.op)},
              {"new_sites", e.new_sites},
              {"pages_fetched", e.pages_fetched},
              {"pages_total", e.pages_total},
              {"api_calls", e.api_calls},
              {"fetch_failures", e.fetch_failures},
              {"unavailable", e.unavailable},
              {"reward", e.reward},
              {"cumulative_sites", e.cumulative_sites},
              {"scores", std::move(scores)}};
}

IterationLog log_from_json(const json& j) {
  IterationLog e;
  j.at("iteration").get_to(e.iteration);
  const auto op = parse_operator(j.at("operator").get<std::string>());
  if (!op) throw std::invalid_argument("unknown operator in log");
  e.op = *op;
  j.at("new_sites").get_to(e.new_sites);
  j.at("pages_fetched").get_to(e.pages_fetched);
  j.at("pages_total").get_to(e.pages_total);
  j.at("api_calls").get_to(e.api_calls);
  j.at("fetch_failures").get_to(e.fetch_failures);
  j.at("unavailable").get_to(e.unavailable);
  j.at("reward").get_to(e.reward);
  j.at("cumulative_sites").get_to(e.cumulative_sites);
  const auto& scores = j.at("scores");
  for (std::size_t i = 0; i < e.scores.size(); ++i) {
    e.scores[i] = scores.at(i).is_null() ? std::numeric_limits<double>::infinity()
                                         : scores.at(i).get<double>();
  }
  return e;
}

json state_to_json(const DiscoveryState& s) {
  json log = json::array();
  for (const auto& e : s.log) log.push_back(log_to_json(e));
  return json{{"results", std::vector<WebsiteRecord>(s.results.records().begin(),
                                                     s.results.records().end())},
              {"ranked", s.ranked},
              {"topk", s.topk},
              {"stats", s.stats},
              {"keyword_state", s.keyword_state},
              {"pages_fetched_total", s.pages_fetched_total},
              {"iteration", s.iteration},
              {"empty_streak", s.empty_streak},
              {"empty_mask", s.empty_mask},
              {"log", std::move(log)},
              {"finished", s.finished},
              {"stop_reason", s.stop_reason}};
}

DiscoveryState state_from_json(const json& j) {
  DiscoveryState s;
  for (const auto& r : j.at("results")) {
    if (!s.results.upsert(r.get<WebsiteRecord>())) {
      throw std::invalid_argument("duplicate site in snapshot");
    }
  }
  j.at("ranked").get_to(s.ranked);
  j.at("topk").get_to(s.topk);
  j.at("stats").get_to(s.stats);
  j.at("keyword_state").get_to(s.keyword_state);
  j.at("pages_fetched_total").get_to(s.pages_fetched_total);
  j.at("iteration").get_to(s.iteration);
  j.at("empty_streak").get_to(s.empty_streak);
  j.at("empty_mask").get_to(s.empty_mask);
  for (const auto& e : j.at("log")) s.log.push_back(log_from_json(e));
  j.at("finished").get_to(s.finished);
  j.at("stop_reason").get_to(s.stop_reason);
  return s;
}

}  // namespace

std::string snapshot_json(const DiscoveryState& state) {
  const json body = state_to_json(state);
  const json doc{{"schema_version", kSchemaVersion},
                 {"checksum", sha256_hex(body.dump())},
                 {"state", body}};
  return doc.dump() + "\n";
}

DiscoveryState parse_snapshot(std::string_view text) {
  try {
    const auto doc = json::parse(text);
    if (doc.at("schema_version").get<int>() != kSchemaVersion) {
      throw CorruptSnapshot("unsupported snapshot schema version");
    }
    const auto& body = doc.at("state");
    if (sha256_hex(body.dump()) != doc.at("checksum").get<std::string>()) {
      throw CorruptSnapshot("snapshot checksum mismatch");
    }
    return state_from_json(body);
  } catch (const CorruptSnapshot&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptSnapshot(std::string("malformed snapshot: ") + e.what());
  }
}

void checkpoint(const DiscoveryState& state, const std::string& path) {
  write_text_file(path, snapshot_json(state));
}

DiscoveryState resume(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptSnapshot("cannot read snapshot " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_snapshot(buf.str());
}

std::vector<DiscoveryEvent> discovery_events(const DiscoveryState& state) {
  std::vector<DiscoveryEvent> events;
  for (const auto& r : state.results.records()) {
    const auto it = r.discovered_at_iteration;
    const std::size_t pages =
        it >= 1 && it <= state.log.size() ? state.log[it - 1].pages_total : 0;
    events.push_back({r.site_key, pages});
  }
  return events;
}

SiteSet discovered_sites(const DiscoveryState& state) {
  SiteSet out;
  for (const auto& r : state.results.records()) out.insert(r.site_key);
  return out;
}

void write_iterations_csv(std::ostream& out, std::span<const IterationLog> log) {
  out << "iteration,operator,new_sites,pages_fetched,reward,cumulative_sites\n";
  for (const auto& e : log) {
    out << e.iteration << ',' << to_string(e.op) << ',' << e.new_sites << ',' << e.pages_fetched
        << ',' << format_double(e.reward) << ',' << e.cumulative_sites << '\n';
  }
}

void write_bandit_csv(std::ostream& out, std::span<const IterationLog> log) {
  out << "iteration,operator,reward,score_forward,score_backward,score_keyword,score_related\n";
  for (const auto& e : log) {
    out << e.iteration << ',' << to_string(e.op) << ',' << format_double(e.reward);
    for (const double s : e.scores) out << ',' << format_double(s);
    out << '\n';
  }
}

void write_ranked_jsonl(std::ostream& out, const DiscoveryState& state) {
  for (std::size_t i = 0; i < state.ranked.size(); ++i) {
    const auto& item = state.ranked.items[i];
    json line{{"position", i}, {"site_key", item.site_key}, {"score", item.score},
              {"ranker", to_string(state.ranked.ranker)}};
    if (const auto* r = state.results.find(item.site_key)) {
      line["url"] = r->best_page.url;
      line["best_score"] = r->best_score;
      line["discovered_by"] =
          r->discovered_by ? json(to_string(*r->discovered_by)) : json(nullptr);
      line["discovered_at_iteration"] = r->discovered_at_iteration;
    }
    out << line.dump() << '\n';
  }
}

}  // namespace disco
