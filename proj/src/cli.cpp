#include "disco/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "disco/engine.hpp"
#include "disco/error.hpp"
#include "disco/eval.hpp"
#include "disco/json_io.hpp"
#include "disco/planted.hpp"
#include "disco/providers.hpp"
#include "disco/simweb.hpp"

namespace disco {

namespace {

namespace fs = std::filesystem;

class OverwriteError : public Error {
 public:
  using Error::Error;
};

class MissingRunArtifacts : public Error {
 public:
  using Error::Error;
};

std::atomic<bool> g_interrupted{false};

extern "C" void on_interrupt(int) { g_interrupted = true; }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

/// Non-blank lines not starting with '#'.
std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    line = trim(line);
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  return lines;
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<json> out;
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string file_hash(const fs::path& path) { return "sha256:" + sha256_hex(read_text(path)); }

void prepare_out_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw OverwriteError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir) && !force) {
      throw OverwriteError(dir.string() + " already exists; pass --force or pick a new directory");
    }
  }
  fs::create_directories(dir);
}

template <class F>
std::string capture(F&& f) {
  std::ostringstream out;
  f(out);
  return out.str();
}

void write_file(const fs::path& path, std::string_view text) {
  write_text_file(path.string(), text);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// --- config -------------------------------------------------------------------

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  for (const auto& [key, v] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown config field '" + section + "." + key + "'");
    }
  }
}

template <class T>
void get_opt(const json& obj, const std::string& section, const char* key, T& dst) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + section + "." + key + "': " + obj.at(key).dump());
  }
}

EndpointConfig endpoint_from_json(const json& j, const std::string& name) {
  check_keys(j, name, {"endpoint", "key", "key_header", "key_param", "query_param", "limit_param"});
  EndpointConfig e;
  get_opt(j, name, "endpoint", e.endpoint);
  get_opt(j, name, "key", e.key);
  get_opt(j, name, "key_header", e.key_header);
  get_opt(j, name, "key_param", e.key_param);
  get_opt(j, name, "query_param", e.query_param);
  get_opt(j, name, "limit_param", e.limit_param);
  return e;
}

struct DiscoverConfig {
  json raw;
  fs::path base;
  EngineConfig engine;  // seeds filled in later
  std::optional<std::string> seed_keyword;
  std::optional<std::string> operator_name;
  std::vector<std::string> seed_urls;
  std::optional<fs::path> seeds_file;
  std::optional<fs::path> negatives_file;
  std::size_t negative_count = 200;
  std::optional<fs::path> stopwords_file;
  HttpProviderConfig http;
  std::optional<fs::path> sim_dir;
};

RankerId ranker_or_throw(const std::string& name) {
  const auto r = parse_ranker(name);
  if (!r) throw ConfigError("unknown ranker '" + name + "'");
  return *r;
}

DiscoverConfig load_discover_config(const fs::path& path) {
  DiscoverConfig c;
  c.base = path.parent_path();
  try {
    c.raw = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  const auto& raw = c.raw;
  check_keys(raw, "config", {"seeds", "engine", "rank", "providers", "sim"});
  const auto rel = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : c.base / p; };

  if (raw.contains("seeds")) {
    const auto& s = raw["seeds"];
    if (s.is_string()) {
      c.seeds_file = rel(s.get<std::string>());
    } else if (s.is_array()) {
      get_opt(raw, "config", "seeds", c.seed_urls);
    } else {
      throw ConfigError("'seeds' must be a file path or a list of URLs");
    }
  }
  if (raw.contains("engine")) {
    const auto& e = raw["engine"];
    check_keys(e, "engine",
               {"seed_keyword", "k", "page_budget_total", "per_iteration_page_budget",
                "keyword_limit", "related_limit", "backlink_limit", "max_new_keywords",
                "rng_seed", "operator", "rerank_window", "workers", "empty_cycle"});
    auto& ec = c.engine;
    if (e.contains("seed_keyword")) {
      std::string kw;
      get_opt(e, "engine", "seed_keyword", kw);
      c.seed_keyword = kw;
    }
    get_opt(e, "engine", "k", ec.k);
    get_opt(e, "engine", "page_budget_total", ec.page_budget_total);
    get_opt(e, "engine", "per_iteration_page_budget", ec.per_iteration_page_budget);
    get_opt(e, "engine", "keyword_limit", ec.keyword_limit);
    get_opt(e, "engine", "related_limit", ec.related_limit);
    get_opt(e, "engine", "backlink_limit", ec.backlink_limit);
    get_opt(e, "engine", "max_new_keywords", ec.max_new_keywords);
    get_opt(e, "engine", "rng_seed", ec.rng_seed);
    get_opt(e, "engine", "rerank_window", ec.rerank_window);
    get_opt(e, "engine", "workers", ec.workers);
    get_opt(e, "engine", "empty_cycle", ec.empty_cycle);
    if (e.contains("operator")) {
      std::string op;
      get_opt(e, "engine", "operator", op);
      c.operator_name = op;
    }
  }
  if (raw.contains("rank")) {
    const auto& r = raw["rank"];
    check_keys(r, "rank", {"ranker", "use_meta", "bs_c", "negatives", "negative_count", "stopwords",
                           "rerank_window"});
    if (r.contains("ranker")) {
      std::string name;
      get_opt(r, "rank", "ranker", name);
      c.engine.ranker = ranker_or_throw(name);
    }
    get_opt(r, "rank", "use_meta", c.engine.use_meta);
    get_opt(r, "rank", "bs_c", c.engine.bs_c);
    get_opt(r, "rank", "rerank_window", c.engine.rerank_window);
    get_opt(r, "rank", "negative_count", c.negative_count);
    if (r.contains("negatives")) {
      std::string p;
      get_opt(r, "rank", "negatives", p);
      c.negatives_file = rel(p);
    }
    if (r.contains("stopwords")) {
      std::string p;
      get_opt(r, "rank", "stopwords", p);
      c.stopwords_file = rel(p);
    }
  }
  if (raw.contains("providers")) {
    const auto& p = raw["providers"];
    check_keys(p, "providers",
               {"keyword", "backlink", "related", "requests_per_second", "per_host_delay",
                "timeout_seconds", "user_agent"});
    if (p.contains("keyword")) c.http.keyword = endpoint_from_json(p["keyword"], "providers.keyword");
    if (p.contains("backlink")) c.http.backlink = endpoint_from_json(p["backlink"], "providers.backlink");
    if (p.contains("related")) c.http.related = endpoint_from_json(p["related"], "providers.related");
    get_opt(p, "providers", "requests_per_second", c.http.requests_per_second);
    get_opt(p, "providers", "per_host_delay", c.http.per_host_delay);
    get_opt(p, "providers", "timeout_seconds", c.http.timeout_seconds);
    get_opt(p, "providers", "user_agent", c.http.user_agent);
  }
  if (raw.contains("sim")) {
    const auto& s = raw["sim"];
    check_keys(s, "sim", {"dir"});
    if (s.contains("dir")) {
      std::string d;
      get_opt(s, "sim", "dir", d);
      c.sim_dir = rel(d);
    }
  }
  return c;
}

std::optional<OperatorId> operator_choice(const std::string& name) {
  if (name == "bandit" || name == "BANDIT") return std::nullopt;
  const auto op = parse_operator(name);
  if (!op) throw ConfigError("unknown operator '" + name + "'");
  return op;
}

SimWeb load_simweb(const fs::path& dir) {
  const auto path = dir / "simweb.json";
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return simweb_from_json(j);
}

std::vector<PageDoc> load_pages(const fs::path& path, const Tokenizer& tok,
                                std::vector<bool>* relevant = nullptr) {
  std::vector<PageDoc> pages;
  for (const auto& j : read_jsonl(path)) {
    try {
      pages.push_back(parse_page(j.at("url").get<std::string>(), j.at("html").get<std::string>(),
                                 0.0, tok));
      if (relevant) relevant->push_back(j.value("relevant", false));
    } catch (const json::exception& e) {
      throw ConfigError(path.string() + ": " + e.what());
    } catch (const MalformedUrl& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return pages;
}

// --- gnuplot companions ---------------------------------------------------------

constexpr std::string_view kDiscoverPlot = R"(set datafile separator ','
set key autotitle columnhead
set xlabel 'iteration'
set terminal pngcairo size 900,500
set output 'sites.png'
set ylabel 'websites discovered'
plot 'iterations.csv' using 1:6 with lines
set output 'ucb.png'
set ylabel 'UCB score'
plot for [c=4:7] 'bandit.csv' using 1:c with lines
)";

constexpr std::string_view kEvalPlot = R"(set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 900,500
set output 'harvest.png'
set xlabel 'pages fetched'
set ylabel 'relevant websites'
runs = system("tail -n +2 harvest_series.csv | cut -d, -f1 | uniq")
plot for [r in runs] sprintf("< grep '^%s,' harvest_series.csv", r) using 2:4 with lines title r
)";

// --- gen-sim --------------------------------------------------------------------

struct GenSimArgs {
  std::string spec;
  std::string out;
  bool force = false;
  std::optional<std::uint64_t> seed;
};

int cmd_gen_sim(const GenSimArgs& a, std::ostream& out) {
  SimWebSpec spec;
  if (!a.spec.empty()) {
    json j;
    try {
      j = json::parse(read_text(a.spec));
    } catch (const json::exception& e) {
      throw ConfigError(a.spec + ": " + e.what());
    }
    from_json(j, spec);
  }
  if (a.seed) spec.seed = *a.seed;
  const fs::path dir = a.out;
  prepare_out_dir(dir, a.force);
  const SimWeb web = generate(spec);

  write_file(dir / "simweb.json", simweb_to_json(web).dump() + "\n");
  write_file(dir / "spec.json", json(web.spec()).dump(2) + "\n");
  std::string labels = "site_key,label,class,seed\n";
  std::array<std::size_t, 7> counts{};
  for (const auto& p : web.pages()) {
    ++counts[static_cast<std::size_t>(p.site_class)];
    labels += p.site_key + ',' + (p.relevant() ? "relevant" : "irrelevant") + ',' +
              std::string(to_string(p.site_class)) + ',' + (p.seed ? "1" : "0") + '\n';
  }
  write_file(dir / "labels.csv", labels);
  std::string seeds;
  for (const auto& u : web.seed_urls()) seeds += u + '\n';
  write_file(dir / "seeds.txt", seeds);

  out << "pages " << web.pages().size() << '\n';
  for (std::size_t c = 0; c < counts.size(); ++c) {
    out << to_string(static_cast<SiteClass>(c)) << ' ' << counts[c] << '\n';
  }
  out << "seeds " << web.seed_urls().size() << '\n';
  out << "seed_keyword " << web.seed_keyword() << '\n';
  out << "dir " << dir.string() << '\n';
  return kExitOk;
}

// --- discover -------------------------------------------------------------------

struct DiscoverArgs {
  std::string config;
  std::string provider = "sim";
  std::string out;
  std::string op;
  std::string ranker;
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool resume = false;
  bool gnuplot = false;
  std::string record;
  std::size_t max_iterations = 0;
};

int cmd_discover(const DiscoverArgs& a, std::ostream& out, std::ostream& err) {
  auto cfg = load_discover_config(a.config);
  auto& ec = cfg.engine;
  if (a.seed) ec.rng_seed = *a.seed;
  if (!a.ranker.empty()) ec.ranker = ranker_or_throw(a.ranker);
  const std::string op_name = !a.op.empty() ? a.op : cfg.operator_name.value_or("bandit");
  ec.fixed_operator = operator_choice(op_name);

  if (cfg.stopwords_file) {
    ec.tokenizer = std::make_shared<const Tokenizer>(
        Tokenizer::from_stopword_file(cfg.stopwords_file->string()));
  }
  const Tokenizer default_tok;
  const Tokenizer& tok = ec.tokenizer ? *ec.tokenizer : default_tok;

  std::map<std::string, std::string> input_hashes;
  input_hashes["config"] = file_hash(a.config);

  // provider
  std::unique_ptr<SearchProvider> base;
  std::optional<SimWeb> web;
  std::string kind = a.provider;
  std::string arg;
  if (const auto colon = a.provider.find(':'); colon != std::string::npos) {
    kind = a.provider.substr(0, colon);
    arg = a.provider.substr(colon + 1);
  }
  if (kind == "sim") {
    const fs::path dir = !arg.empty() ? fs::path(arg) : cfg.sim_dir.value_or(fs::path{});
    if (dir.empty()) throw ConfigError("the sim provider needs a directory (sim:<dir> or sim.dir)");
    web = load_simweb(dir);
    input_hashes["simweb"] = file_hash(dir / "simweb.json");
    base = std::make_unique<SimProvider>(*web);
  } else if (kind == "live") {
    auto http = cfg.http;
    apply_env_keys(http);
    base = std::make_unique<HttpSearchProvider>(http);
  } else if (kind == "replay") {
    if (arg.empty()) throw ConfigError("the replay provider needs a fixture file (replay:<file>)");
    base = std::make_unique<ReplayProvider>(arg);
    input_hashes["replay"] = file_hash(arg);
  } else {
    throw ConfigError("unknown provider '" + a.provider + "'");
  }
  std::unique_ptr<RecordingProvider> recorder;
  if (!a.record.empty()) recorder = std::make_unique<RecordingProvider>(*base, a.record);
  SearchProvider& provider = recorder ? static_cast<SearchProvider&>(*recorder) : *base;

  // seeds
  std::vector<std::string> urls = cfg.seed_urls;
  if (cfg.seeds_file) {
    urls = read_lines(*cfg.seeds_file);
    input_hashes["seeds"] = file_hash(*cfg.seeds_file);
  } else if (urls.empty() && web) {
    urls = web->seed_urls();
  }
  if (urls.empty()) throw ConfigError("no seed URLs configured");
  for (const auto& url : urls) {
    WebsiteRecord r;
    try {
      r.best_page = parse_page(url, provider.fetch(url), 0.0, tok);
    } catch (const MalformedUrl& e) {
      throw ConfigError("bad seed URL " + url + ": " + e.what());
    } catch (const FetchError& e) {
      throw ProviderError("cannot fetch seed " + url + ": " + e.what());
    }
    r.site_key = r.best_page.site_key;
    ec.seeds.push_back(std::move(r));
  }
  ec.seed_keyword = cfg.seed_keyword.value_or(web ? web->seed_keyword() : std::string{});

  // negatives
  NegativePool negatives;
  if (cfg.negatives_file) {
    negatives.pages = load_pages(*cfg.negatives_file, tok);
    input_hashes["negatives"] = file_hash(*cfg.negatives_file);
  } else if (web) {
    std::size_t junk = 0;
    for (const auto& p : web->pages()) junk += p.site_class == SiteClass::Junk;
    negatives = negative_pool(*web, std::min(cfg.negative_count, junk), ec.rng_seed);
  }

  const fs::path dir = a.out;
  const fs::path state_path = dir / "state.json";
  std::optional<Engine> engine;
  if (a.resume) {
    if (!fs::exists(state_path)) {
      throw MissingRunArtifacts("nothing to resume: " + state_path.string() + " is missing");
    }
    engine.emplace(ec, provider, std::move(negatives), resume(state_path.string()));
  } else {
    ec.validate();
    prepare_out_dir(dir, a.force);
    engine.emplace(ec, provider, std::move(negatives));
  }

  const std::string started = utc_now();
  g_interrupted = false;
  const auto previous = std::signal(SIGINT, on_interrupt);
  std::size_t steps = 0;
  const auto& state = engine->run(
      [&] { return g_interrupted.load() || (a.max_iterations > 0 && steps >= a.max_iterations); },
      [&](const DiscoveryState& s) {
        ++steps;
        checkpoint(s, state_path.string());
      });
  std::signal(SIGINT, previous);
  checkpoint(state, state_path.string());

  std::vector<std::string> outputs = {"state.json", "iterations.csv", "bandit.csv", "ranked.jsonl",
                                      "ranked.csv", "manifest.json"};
  write_file(dir / "iterations.csv", capture([&](std::ostream& o) { write_iterations_csv(o, state.log); }));
  write_file(dir / "bandit.csv", capture([&](std::ostream& o) { write_bandit_csv(o, state.log); }));
  write_file(dir / "ranked.jsonl", capture([&](std::ostream& o) { write_ranked_jsonl(o, state); }));
  write_file(dir / "ranked.csv", capture([&](std::ostream& o) { write_ranked_csv(o, state.ranked); }));
  if (a.gnuplot) {
    write_file(dir / "discover.gp", kDiscoverPlot);
    outputs.push_back("discover.gp");
  }

  json manifest{{"command", "discover"},
                {"config", cfg.raw},
                {"provider", a.provider},
                {"operator", op_name},
                {"ranker", to_string(ec.ranker)},
                {"rng_seed", ec.rng_seed},
                {"seed_keyword", ec.seed_keyword},
                {"seeds", urls},
                {"inputs", input_hashes},
                {"started_at", started},
                {"finished_at", utc_now()},
                {"resumed", a.resume},
                {"iterations", state.iteration},
                {"pages_fetched", state.pages_fetched_total},
                {"sites_discovered", state.results.size()},
                {"stop_reason", state.stop_reason},
                {"outputs", outputs}};
  if (web) manifest["spec"] = web->spec();
  if (!a.record.empty()) manifest["recording"] = a.record;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  for (const auto& o : outputs) out << (dir / o).string() << '\n';
  if (g_interrupted) {
    err << "interrupted after iteration " << state.iteration << "; continue with --resume\n";
    return kExitRuntime;
  }
  err << "iterations " << state.iteration << ", pages " << state.pages_fetched_total << ", sites "
      << state.results.size() << " (" << (state.stop_reason.empty() ? "running" : state.stop_reason)
      << ")\n";
  return kExitOk;
}

// --- eval -----------------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> runs;
  std::string truth = "union";
  std::string labels;
  std::string out;
  bool force = false;
  bool gnuplot = false;
  std::size_t interval = 500;
};

struct Labels {
  GroundTruth relevant;
  SiteSet seeds;
};

Labels load_labels(fs::path path) {
  if (fs::is_directory(path)) path /= "labels.csv";
  std::istringstream in(read_text(path));
  Labels l;
  std::string line;
  std::getline(in, line);
  if (trim(line).rfind("site_key,label", 0) != 0) {
    throw ConfigError(path.string() + ": expected a site_key,label header");
  }
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    if (cells.size() < 2) throw ConfigError(path.string() + ": bad row '" + line + "'");
    if (cells[1] == "relevant" || cells[1] == "1") l.relevant.relevant.insert(cells[0]);
    if (cells.size() >= 4 && cells[3] == "1") l.seeds.insert(cells[0]);
  }
  return l;
}

struct RunData {
  std::string name;
  DiscoveryState state;
  SiteSet sites;
};

RunData load_run(const fs::path& dir) {
  const auto path = dir / "state.json";
  if (!fs::exists(path)) {
    throw MissingRunArtifacts(dir.string() + " has no state.json; is it a discover run directory?");
  }
  RunData r;
  r.name = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
  r.state = resume(path.string());
  r.sites = discovered_sites(r.state);
  return r;
}

template <class F>
auto try_metric(F&& f) -> std::optional<decltype(f())> {
  try {
    return f();
  } catch (const MetricError&) {
    return std::nullopt;
  }
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (a.runs.empty()) throw ConfigError("eval needs at least one --run directory");
  if (a.interval == 0) throw ConfigError("--interval must be >= 1");
  std::vector<RunData> runs;
  for (const auto& d : a.runs) runs.push_back(load_run(d));
  // Distinct names for the CSV run column.
  std::map<std::string, int> seen;
  for (auto& r : runs) {
    if (const int n = seen[r.name]++; n > 0) r.name += "#" + std::to_string(n + 1);
  }

  std::optional<Labels> labels;
  GroundTruth universe;
  std::vector<SiteSet> sets;
  for (const auto& r : runs) sets.push_back(r.sites);
  if (a.truth.rfind("sim-labels:", 0) == 0) {
    labels = load_labels(a.truth.substr(11));
    for (const auto& s : labels->relevant.relevant) {
      if (!labels->seeds.contains(s)) universe.relevant.insert(s);
    }
  } else if (a.truth == "union") {
    if (!a.labels.empty()) labels = load_labels(a.labels);
    universe = union_truth(sets);
    if (labels) std::erase_if(universe.relevant, [&](const auto& s) { return !labels->relevant.contains(s); });
  } else {
    throw ConfigError("unknown truth '" + a.truth + "' (use sim-labels:<labels.csv> or union)");
  }

  const auto splits = try_metric([&] { return coverage_split(sets, universe); });
  static constexpr std::array<std::size_t, 3> kCutoffs = {5, 10, 20};
  const std::vector<std::string> header = {
      "run", "ranker", "iterations", "pages_fetched", "sites", "relevant_sites", "harvest_rate",
      "coverage", "intersection", "complement", "p_at_5", "p_at_10", "p_at_20", "r", "p_at_r",
      "mean_rank", "median_rank"};
  std::string csv;
  for (std::size_t i = 0; i < header.size(); ++i) csv += (i ? "," : "") + header[i];
  csv += '\n';
  json rows = json::array();
  const auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string{}; };
  const auto jcell = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };

  std::string series = "run,pages,discovered,relevant,harvest_rate\n";
  std::string cov = "run,coverage,intersection,complement\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const auto& ranked = r.state.ranked;
    std::optional<double> harvest, relevant_sites, pr, mean, median, rr;
    std::array<std::optional<double>, 3> pk;
    if (labels) {
      const auto& truth = labels->relevant;
      harvest = try_metric([&] { return harvest_rate(r.sites, truth); });
      std::size_t n = 0;
      for (const auto& s : r.sites) n += truth.contains(s);
      relevant_sites = static_cast<double>(n);
      for (std::size_t c = 0; c < kCutoffs.size(); ++c) {
        pk[c] = try_metric([&] { return precision_at_k(ranked, truth, kCutoffs[c]); });
      }
      rr = static_cast<double>(relevant_in_list(ranked, truth));
      pr = try_metric([&] { return precision_at_r(ranked, truth); });
      mean = try_metric([&] { return mean_rank(ranked, truth); });
      median = try_metric([&] { return median_rank(ranked, truth); });
      for (const auto& p : harvest_series(discovery_events(r.state), r.state.pages_fetched_total,
                                          truth, a.interval)) {
        series += r.name + ',' + std::to_string(p.pages) + ',' + std::to_string(p.discovered) +
                  ',' + std::to_string(p.relevant) + ',' + fmt(p.harvest_rate) + '\n';
      }
    }
    std::optional<double> c, inter, comp;
    if (splits) {
      c = (*splits)[i].coverage;
      inter = (*splits)[i].intersection;
      comp = (*splits)[i].complement;
      cov += r.name + ',' + fmt(*c) + ',' + fmt(*inter) + ',' + fmt(*comp) + '\n';
    }
    csv += r.name + ',' + std::string(to_string(ranked.ranker)) + ',' +
           std::to_string(r.state.iteration) + ',' + std::to_string(r.state.pages_fetched_total) +
           ',' + std::to_string(r.sites.size()) + ',' + cell(relevant_sites) + ',' + cell(harvest) +
           ',' + cell(c) + ',' + cell(inter) + ',' + cell(comp) + ',' + cell(pk[0]) + ',' +
           cell(pk[1]) + ',' + cell(pk[2]) + ',' + cell(rr) + ',' + cell(pr) + ',' + cell(mean) +
           ',' + cell(median) + '\n';
    rows.push_back(json{{"run", r.name},
                        {"path", a.runs[i]},
                        {"ranker", to_string(ranked.ranker)},
                        {"iterations", r.state.iteration},
                        {"pages_fetched", r.state.pages_fetched_total},
                        {"sites", r.sites.size()},
                        {"relevant_sites", jcell(relevant_sites)},
                        {"harvest_rate", jcell(harvest)},
                        {"coverage", jcell(c)},
                        {"intersection", jcell(inter)},
                        {"complement", jcell(comp)},
                        {"p_at_5", jcell(pk[0])},
                        {"p_at_10", jcell(pk[1])},
                        {"p_at_20", jcell(pk[2])},
                        {"r", jcell(rr)},
                        {"p_at_r", jcell(pr)},
                        {"mean_rank", jcell(mean)},
                        {"median_rank", jcell(median)}});
  }

  if (a.out.empty()) {
    out << csv;
    return kExitOk;
  }
  const fs::path dir = a.out;
  prepare_out_dir(dir, a.force);
  const json report{{"truth", a.truth},
                    {"universe_size", universe.relevant.size()},
                    {"interval", a.interval},
                    {"runs", rows}};
  std::vector<std::string> outputs = {"metrics.csv", "metrics.json", "coverage.csv"};
  write_file(dir / "metrics.csv", csv);
  write_file(dir / "metrics.json", report.dump(2) + "\n");
  write_file(dir / "coverage.csv", cov);
  if (labels) {
    write_file(dir / "harvest_series.csv", series);
    outputs.push_back("harvest_series.csv");
    if (a.gnuplot) {
      write_file(dir / "harvest.gp", kEvalPlot);
      outputs.push_back("harvest.gp");
    }
  }
  for (const auto& o : outputs) out << (dir / o).string() << '\n';
  return kExitOk;
}

// --- rank -----------------------------------------------------------------------

struct RankArgs {
  std::string corpus;
  std::string seeds;
  std::string ranker = "ensemble";
  std::uint64_t seed = 0;
  std::string sweep;
  std::size_t k = 0;
  std::string out;
  bool use_meta = true;
};

std::pair<std::size_t, std::size_t> parse_sweep(const std::string& s) {
  const auto dots = s.find("..");
  const auto num = [&](std::string_view part) {
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || p != part.data() + part.size()) {
      throw ConfigError("bad --seed-sweep '" + s + "' (expected A..B)");
    }
    return v;
  };
  if (dots == std::string::npos) throw ConfigError("bad --seed-sweep '" + s + "' (expected A..B)");
  const auto lo = num(std::string_view(s).substr(0, dots));
  const auto hi = num(std::string_view(s).substr(dots + 2));
  if (lo == 0 || hi < lo) throw ConfigError("bad --seed-sweep range '" + s + "'");
  return {lo, hi};
}

int cmd_rank(const RankArgs& a, std::ostream& out) {
  RankingOptions options;
  options.ranker = ranker_or_throw(a.ranker);
  options.rng_seed = a.seed;
  options.use_meta = a.use_meta;
  const Tokenizer tok;
  const fs::path corpus = a.corpus;
  std::vector<bool> relevant;
  const auto pages = load_pages(corpus / "pages.jsonl", tok, &relevant);
  if (pages.empty()) throw ConfigError("empty corpus: " + (corpus / "pages.jsonl").string());
  NegativePool negatives;
  if (fs::exists(corpus / "negatives.jsonl")) negatives.pages = load_pages(corpus / "negatives.jsonl", tok);

  std::map<std::string, std::size_t> by_key;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    by_key.emplace(pages[i].site_key, i);
    by_key.emplace(pages[i].url, i);
  }
  std::vector<std::size_t> seed_idx;
  for (const auto& s : read_lines(a.seeds)) {
    const auto it = by_key.find(s);
    if (it == by_key.end()) throw ConfigError("seed " + s + " is not in the corpus");
    if (std::find(seed_idx.begin(), seed_idx.end(), it->second) == seed_idx.end()) {
      seed_idx.push_back(it->second);
    }
  }
  if (seed_idx.empty()) throw ConfigError("empty seeds file: " + a.seeds);

  const auto record = [&](std::size_t i) {
    WebsiteRecord r;
    r.site_key = pages[i].site_key;
    r.best_page = pages[i];
    return r;
  };
  std::vector<WebsiteRecord> candidates;
  GroundTruth truth;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    if (std::find(seed_idx.begin(), seed_idx.end(), i) != seed_idx.end()) continue;
    candidates.push_back(record(i));
    if (relevant[i]) truth.relevant.insert(pages[i].site_key);
  }
  if (candidates.empty()) throw ConfigError("no candidates left after removing the seeds");
  const auto seeds_of = [&](std::size_t n) {
    std::vector<WebsiteRecord> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(record(seed_idx[i]));
    return SeedSet(std::move(s));
  };

  std::ostringstream data;
  if (a.sweep.empty()) {
    write_ranked_csv(data, rank_websites(candidates, seeds_of(seed_idx.size()), negatives, options));
  } else {
    const auto [lo, hi] = parse_sweep(a.sweep);
    if (hi > seed_idx.size()) {
      throw ConfigError("--seed-sweep goes to " + std::to_string(hi) + " but only " +
                        std::to_string(seed_idx.size()) + " seeds are listed");
    }
    const std::size_t k = a.k > 0 ? a.k : relevant_in_list(RankedList{options.ranker, [&] {
                            std::vector<RankedItem> items;
                            for (const auto& c : candidates) items.push_back({c.site_key, 0.0});
                            return items;
                          }()}, truth);
    if (k == 0) throw ConfigError("the corpus has no relevant candidates to evaluate against");
    data << "seeds,k,precision_at_k\n";
    for (std::size_t n = lo; n <= hi; ++n) {
      const auto list = rank_websites(candidates, seeds_of(n), negatives, options);
      data << n << ',' << k << ',' << fmt(precision_at_k(list, truth, k)) << '\n';
    }
  }
  if (a.out.empty()) {
    out << data.str();
  } else {
    write_file(a.out, data.str());
    out << a.out << '\n';
  }
  return kExitOk;
}

// --- gen-corpus -------------------------------------------------------------------

struct GenCorpusArgs {
  std::string out;
  PlantedSpec spec;
  std::size_t seeds = 5;
  bool force = false;
};

int cmd_gen_corpus(const GenCorpusArgs& a, std::ostream& out) {
  if (a.seeds > a.spec.n_relevant) throw ConfigError("--seeds exceeds --relevant");
  PlantedCorpus corpus;
  try {
    corpus = generate_planted(a.spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const fs::path dir = a.out;
  prepare_out_dir(dir, a.force);
  const auto line = [](const PlantedPage& p) {
    return json{{"url", p.doc.url}, {"html", p.html}, {"relevant", p.relevant}}.dump() + "\n";
  };
  std::string pages, negatives, seeds;
  for (const auto& p : corpus.relevant) pages += line(p);
  for (const auto& p : corpus.noise) pages += line(p);
  for (const auto& p : corpus.negatives) negatives += line(p);
  for (std::size_t i = 0; i < a.seeds; ++i) seeds += corpus.relevant[i].doc.url + '\n';
  write_file(dir / "pages.jsonl", pages);
  write_file(dir / "negatives.jsonl", negatives);
  write_file(dir / "seeds.txt", seeds);
  for (const char* f : {"pages.jsonl", "negatives.jsonl", "seeds.txt"}) out << (dir / f).string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discover websites of a domain from a handful of seeds."};
  app.name("disco");
  app.require_subcommand(1);

  GenSimArgs gs;
  auto* gen_sim = app.add_subcommand("gen-sim", "Generate a synthetic web with relevance labels");
  gen_sim->add_option("--spec", gs.spec, "SimWeb spec JSON (defaults when omitted)");
  gen_sim->add_option("--out", gs.out, "Output directory")->required();
  gen_sim->add_option("--seed", gs.seed, "Override the spec's RNG seed");
  gen_sim->add_flag("--force", gs.force, "Write into an existing directory");

  DiscoverArgs ds;
  auto* discover = app.add_subcommand("discover", "Run website discovery");
  discover->add_option("--config", ds.config, "Config JSON")->required();
  discover->add_option("--provider", ds.provider, "sim[:DIR] | live | replay:FILE");
  discover->add_option("--out", ds.out, "Run directory")->required();
  discover->add_option("--operator", ds.op, "forward|backward|keyword|related|bandit");
  discover->add_option("--ranker", ds.ranker, "jaccard|cosine|bs|oneclass|binomial|ensemble");
  discover->add_option("--seed", ds.seed, "RNG seed");
  discover->add_option("--record", ds.record, "Append provider traffic to a replay fixture");
  discover->add_option("--max-iterations", ds.max_iterations, "Stop after N iterations (resumable)");
  discover->add_flag("--force", ds.force, "Write into an existing directory");
  discover->add_flag("--resume", ds.resume, "Continue from the run directory's state.json");
  discover->add_flag("--emit-gnuplot", ds.gnuplot, "Write a gnuplot script next to the CSVs");

  EvalArgs es;
  auto* eval = app.add_subcommand("eval", "Compute metrics for discovery runs");
  eval->add_option("--run", es.runs, "Run directory (repeatable)")->required();
  eval->add_option("--truth", es.truth, "sim-labels:<labels.csv|dir> | union");
  eval->add_option("--labels", es.labels, "Relevance labels for union truth");
  eval->add_option("--out", es.out, "Output directory (metrics CSV to stdout when omitted)");
  eval->add_option("--interval", es.interval, "Pages between harvest series points");
  eval->add_flag("--force", es.force, "Write into an existing directory");
  eval->add_flag("--emit-gnuplot", es.gnuplot, "Write a gnuplot script next to the CSVs");

  RankArgs rs;
  bool no_meta = false;
  auto* rank = app.add_subcommand("rank", "Rank a static corpus against seeds");
  rank->add_option("--corpus", rs.corpus, "Directory with pages.jsonl [and negatives.jsonl]")->required();
  rank->add_option("--seeds", rs.seeds, "Seed URLs, one per line")->required();
  rank->add_option("--ranker", rs.ranker, "jaccard|cosine|bs|oneclass|binomial|ensemble");
  rank->add_option("--seed", rs.seed, "RNG seed");
  rank->add_option("--seed-sweep", rs.sweep, "A..B: precision per number of seeds");
  rank->add_option("--k", rs.k, "Cutoff for --seed-sweep (default: relevant candidates)");
  rank->add_option("--out", rs.out, "Output CSV (stdout when omitted)");
  rank->add_flag("--no-meta", no_meta, "Ignore metadata tokens");

  GenCorpusArgs gc;
  auto* gen_corpus = app.add_subcommand("gen-corpus", "Generate a planted corpus for rank");
  gen_corpus->add_option("--out", gc.out, "Output directory")->required();
  gen_corpus->add_option("--seed", gc.spec.seed, "RNG seed");
  gen_corpus->add_option("--relevant", gc.spec.n_relevant, "Relevant pages");
  gen_corpus->add_option("--noise", gc.spec.n_noise, "Noise pages");
  gen_corpus->add_option("--negatives", gc.spec.n_negatives, "Negative pool pages");
  gen_corpus->add_option("--seeds", gc.seeds, "Relevant pages listed in seeds.txt");
  gen_corpus->add_flag("--force", gc.force, "Write into an existing directory");

  std::vector<const char*> argv = {"disco"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  rs.use_meta = !no_meta;

  try {
    if (gen_sim->parsed()) return cmd_gen_sim(gs, out);
    if (discover->parsed()) return cmd_discover(ds, out, err);
    if (eval->parsed()) return cmd_eval(es, out);
    if (rank->parsed()) return cmd_rank(rs, out);
    if (gen_corpus->parsed()) return cmd_gen_corpus(gc, out);
  } catch (const ConfigError& e) {
    err << "disco: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SpecError& e) {
    err << "disco: spec error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const OverwriteError& e) {
    err << "disco: " << e.what() << '\n';
    return kExitOverwrite;
  } catch (const ProviderError& e) {
    err << "disco: provider unavailable: " << e.what() << '\n';
    return kExitProvider;
  } catch (const std::exception& e) {
    err << "disco: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace disco
