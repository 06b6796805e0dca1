#include "disco/providers.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "disco/error.hpp"

namespace disco {

using nlohmann::json;

namespace {

double steady_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void sleep_seconds(double s) {
  if (s > 0) std::this_thread::sleep_for(std::chrono::duration<double>(s));
}

bool is_http_url(std::string_view url) {
  return url.starts_with("http://") || url.starts_with("https://");
}

// "https://host:port/path?q" -> {"https://host:port", "/path?q"}
std::pair<std::string, std::string> split_origin(std::string_view url) {
  if (!is_http_url(url)) throw ProviderError("not an http(s) URL: " + std::string(url));
  const auto host_start = url.find("://") + 3;
  auto path_start = url.find_first_of("/?#", host_start);
  if (path_start == std::string_view::npos) path_start = url.size();
  std::string path(url.substr(path_start));
  if (const auto hash = path.find('#'); hash != std::string::npos) path.resize(hash);
  if (path.empty() || path[0] != '/') path.insert(0, "/");
  return {std::string(url.substr(0, path_start)), path};
}

std::vector<std::string> string_field(const json& array, const char* field) {
  std::vector<std::string> out;
  if (!array.is_array()) return out;
  for (const auto& item : array) {
    if (field == nullptr) {
      if (item.is_string()) out.push_back(item.get<std::string>());
    } else if (item.is_object() && item.contains(field) && item[field].is_string()) {
      out.push_back(item[field].get<std::string>());
    }
  }
  return out;
}

}  // namespace

TokenBucket::TokenBucket(double rate_per_second, double burst, Clock clock, Sleeper sleeper)
    : rate_(rate_per_second),
      burst_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      clock_(clock ? std::move(clock) : Clock(steady_seconds)),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper(sleep_seconds)) {
  if (!(rate_ > 0)) throw std::invalid_argument("token bucket rate must be positive");
  last_ = clock_();
}

void TokenBucket::refill() {
  const double now = clock_();
  tokens_ = std::min(burst_, tokens_ + (now - last_) * rate_);
  last_ = now;
}

bool TokenBucket::try_acquire() {
  std::lock_guard lock(mutex_);
  refill();
  if (tokens_ < 1.0 - 1e-9) return false;
  tokens_ = std::max(0.0, tokens_ - 1.0);
  return true;
}

double TokenBucket::acquire() {
  std::lock_guard lock(mutex_);
  double waited = 0.0;
  refill();
  // The epsilon stops rounding from leaving the bucket a hair short forever.
  while (tokens_ < 1.0 - 1e-9) {
    const double wait = (1.0 - tokens_) / rate_;
    sleeper_(wait);
    waited += wait;
    refill();
  }
  tokens_ = std::max(0.0, tokens_ - 1.0);
  return waited;
}

void apply_env_keys(HttpProviderConfig& config) {
  const auto override_key = [](EndpointConfig& ep, const char* var) {
    if (const char* v = std::getenv(var); v != nullptr && *v != '\0') ep.key = v;
  };
  override_key(config.keyword, "DISCO_KEYWORD_KEY");
  override_key(config.backlink, "DISCO_BACKLINK_KEY");
  override_key(config.related, "DISCO_RELATED_KEY");
}

std::vector<std::string> parse_search_response(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ProviderError(std::string("unparseable search response: ") + e.what());
  }
  std::vector<std::string> urls;
  if (doc.is_array()) {
    urls = string_field(doc, nullptr);
  } else if (doc.is_object()) {
    if (doc.contains("webPages") && doc["webPages"].is_object()) {
      urls = string_field(doc["webPages"].value("value", json::array()), "url");
    } else if (doc.contains("items")) {
      urls = string_field(doc["items"], "link");
    } else if (doc.contains("results")) {
      urls = string_field(doc["results"], "url");
    } else if (doc.contains("urls")) {
      urls = string_field(doc["urls"], nullptr);
    }
  }
  std::erase_if(urls, [](const std::string& u) { return !is_http_url(u); });
  return urls;
}

// --- HttpSearchProvider -----------------------------------------------------

struct HttpSearchProvider::Impl {
  explicit Impl(HttpProviderConfig c)
      : config(std::move(c)),
        keyword_bucket(config.requests_per_second),
        backlink_bucket(config.requests_per_second),
        related_bucket(config.requests_per_second) {}

  std::unique_ptr<httplib::Client> client(const std::string& origin) const {
    auto cli = std::make_unique<httplib::Client>(origin);
    const auto secs = static_cast<time_t>(config.timeout_seconds);
    const auto usecs = static_cast<time_t>((config.timeout_seconds - secs) * 1e6);
    cli->set_connection_timeout(secs, usecs);
    cli->set_read_timeout(secs, usecs);
    cli->set_follow_location(true);
    return cli;
  }

  std::vector<std::string> search(const EndpointConfig& ep, TokenBucket& bucket,
                                  const std::string& query, std::size_t limit,
                                  const char* what) {
    if (!ep.configured()) throw OperatorUnavailable(std::string(what) + " endpoint not configured");
    bucket.acquire();
    const auto [origin, path] = split_origin(ep.endpoint);
    httplib::Params params{{ep.query_param, query}, {ep.limit_param, std::to_string(limit)}};
    httplib::Headers headers{{"User-Agent", config.user_agent}};
    if (!ep.key.empty()) {
      if (!ep.key_header.empty()) {
        headers.emplace(ep.key_header, ep.key);
      } else {
        params.emplace(ep.key_param, ep.key);
      }
    }
    auto res = client(origin)->Get(path, params, headers);
    if (!res) {
      throw ProviderError(std::string(what) + " request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw ProviderError(std::string(what) + " request returned HTTP " +
                          std::to_string(res->status));
    }
    auto urls = parse_search_response(res->body);
    if (urls.size() > limit) urls.resize(limit);
    return urls;
  }

  void wait_for_host(const std::string& origin) {
    double wait = 0.0;
    {
      std::lock_guard lock(host_mutex);
      const double now = steady_seconds();
      auto [it, inserted] = next_allowed.try_emplace(origin, now);
      const double start = std::max(now, it->second);
      wait = start - now;
      it->second = start + config.per_host_delay;
    }
    sleep_seconds(wait);
  }

  HttpProviderConfig config;
  TokenBucket keyword_bucket;
  TokenBucket backlink_bucket;
  TokenBucket related_bucket;
  std::mutex host_mutex;
  std::unordered_map<std::string, double> next_allowed;
};

HttpSearchProvider::HttpSearchProvider(HttpProviderConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpSearchProvider::~HttpSearchProvider() = default;

std::vector<std::string> HttpSearchProvider::keyword_search(std::string_view query,
                                                            std::size_t limit) {
  return impl_->search(impl_->config.keyword, impl_->keyword_bucket, std::string(query), limit,
                       "keyword search");
}

std::vector<std::string> HttpSearchProvider::backlink_search(std::string_view url,
                                                             std::size_t limit) {
  return impl_->search(impl_->config.backlink, impl_->backlink_bucket, std::string(url), limit,
                       "backlink search");
}

std::vector<std::string> HttpSearchProvider::related_search(std::string_view site_key,
                                                            std::size_t limit) {
  return impl_->search(impl_->config.related, impl_->related_bucket,
                       "related:http://" + std::string(site_key), limit, "related search");
}

std::string HttpSearchProvider::fetch(std::string_view url) {
  std::pair<std::string, std::string> parts;
  try {
    parts = split_origin(url);
  } catch (const ProviderError& e) {
    throw FetchError(e.what());
  }
  impl_->wait_for_host(parts.first);
  auto res = impl_->client(parts.first)
                 ->Get(parts.second, httplib::Headers{{"User-Agent", impl_->config.user_agent}});
  if (!res) throw FetchError("fetch failed: " + httplib::to_string(res.error()));
  if (res->status == 404 || res->status == 410) throw NotFound("not found: " + std::string(url));
  if (res->status != 200) {
    throw FetchError("fetch returned HTTP " + std::to_string(res->status) + ": " +
                     std::string(url));
  }
  return std::move(res->body);
}

// --- record / replay --------------------------------------------------------

namespace {

json request_json(std::string_view kind, std::string_view arg_name, std::string_view arg,
                  std::size_t limit) {
  json req{{"kind", kind}, {std::string(arg_name), arg}};
  if (kind != "fetch") req["limit"] = limit;
  return req;
}

std::string lookup_key(std::string_view kind, std::string_view arg) {
  return std::string(kind) + '\n' + std::string(arg);
}

}  // namespace

RecordingProvider::RecordingProvider(SearchProvider& inner, std::string path)
    : inner_(inner), path_(std::move(path)) {}

void RecordingProvider::append(const std::string& line) {
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write fixture file " + path_);
  out << line << '\n';
}

#define DISCO_RECORD_SEARCH(method, kind, arg_name)                                      \
  std::vector<std::string> RecordingProvider::method(std::string_view arg,               \
                                                     std::size_t limit) {                \
    const auto req = request_json(kind, arg_name, arg, limit);                           \
    try {                                                                                \
      auto urls = inner_.method(arg, limit);                                             \
      append(json{{"request", req}, {"response", {{"urls", urls}}}}.dump());             \
      return urls;                                                                       \
    } catch (const ProviderError& e) {                                                   \
      append(json{{"request", req}, {"response", {{"error", e.what()}}}}.dump());        \
      throw;                                                                             \
    }                                                                                    \
  }

DISCO_RECORD_SEARCH(keyword_search, "keyword", "query")
DISCO_RECORD_SEARCH(backlink_search, "backlink", "url")
DISCO_RECORD_SEARCH(related_search, "related", "site_key")

#undef DISCO_RECORD_SEARCH

std::string RecordingProvider::fetch(std::string_view url) {
  const auto req = request_json("fetch", "url", url, 0);
  try {
    auto html = inner_.fetch(url);
    append(json{{"request", req}, {"response", {{"html", html}}}}.dump());
    return html;
  } catch (const FetchError& e) {
    append(json{{"request", req}, {"response", {{"error", e.what()}}}}.dump());
    throw;
  }
}

ReplayProvider::ReplayProvider(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OperatorUnavailable("replay fixture not found: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto entry = json::parse(line);
      const auto& req = entry.at("request");
      const auto kind = req.at("kind").get<std::string>();
      std::string arg;
      if (kind == "keyword") {
        arg = req.at("query").get<std::string>();
      } else if (kind == "backlink" || kind == "fetch") {
        arg = req.at("url").get<std::string>();
      } else if (kind == "related") {
        arg = req.at("site_key").get<std::string>();
      } else {
        throw std::invalid_argument("unknown request kind " + kind);
      }
      const auto& resp = entry.at("response");
      Response r;
      if (resp.contains("error")) r.error = resp["error"].get<std::string>();
      if (resp.contains("urls")) r.urls = resp["urls"].get<std::vector<std::string>>();
      if (resp.contains("html")) r.html = resp["html"].get<std::string>();
      responses_.insert_or_assign(lookup_key(kind, arg), std::move(r));
    } catch (const std::exception& e) {
      throw OperatorUnavailable("bad replay fixture " + path + ":" + std::to_string(line_no) +
                                ": " + e.what());
    }
  }
}

const ReplayProvider::Response& ReplayProvider::lookup(std::string_view kind,
                                                       std::string_view arg) const {
  const auto it = responses_.find(lookup_key(kind, arg));
  if (it == responses_.end()) {
    if (kind == "fetch") throw NotFound("no recorded fetch for " + std::string(arg));
    throw OperatorUnavailable("no recorded " + std::string(kind) + " response for " +
                              std::string(arg));
  }
  return it->second;
}

std::vector<std::string> ReplayProvider::search(std::string_view kind, std::string_view arg,
                                                std::size_t limit) const {
  const auto& r = lookup(kind, arg);
  if (!r.error.empty()) throw OperatorUnavailable(r.error);
  auto urls = r.urls;
  if (urls.size() > limit) urls.resize(limit);
  return urls;
}

std::vector<std::string> ReplayProvider::keyword_search(std::string_view query,
                                                        std::size_t limit) {
  return search("keyword", query, limit);
}

std::vector<std::string> ReplayProvider::backlink_search(std::string_view url,
                                                         std::size_t limit) {
  return search("backlink", url, limit);
}

std::vector<std::string> ReplayProvider::related_search(std::string_view site_key,
                                                        std::size_t limit) {
  return search("related", site_key, limit);
}

std::string ReplayProvider::fetch(std::string_view url) {
  const auto& r = lookup("fetch", url);
  if (!r.error.empty()) throw FetchError(r.error);
  return r.html;
}

}  // namespace disco
