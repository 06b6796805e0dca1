#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "disco/operators.hpp"

namespace disco {

/// Classic token bucket. The clock returns seconds; the sleeper blocks for the
/// given number of seconds. Both default to the steady clock.
class TokenBucket {
 public:
  using Clock = std::function<double()>;
  using Sleeper = std::function<void(double)>;

  explicit TokenBucket(double rate_per_second = 1.0, double burst = 1.0, Clock clock = {},
                       Sleeper sleeper = {});

  /// Blocks until a token is available and takes it. Returns the seconds waited.
  double acquire();
  bool try_acquire();

 private:
  void refill();

  double rate_;
  double burst_;
  double tokens_;
  double last_;
  Clock clock_;
  Sleeper sleeper_;
  std::mutex mutex_;
};

struct EndpointConfig {
  std::string endpoint;     // e.g. https://api.example.com/v7.0/search
  std::string key;
  std::string key_header;   // when set the key travels in this header ...
  std::string key_param = "key";  // ... otherwise as this query parameter
  std::string query_param = "q";
  std::string limit_param = "count";

  bool configured() const { return !endpoint.empty(); }
};

struct HttpProviderConfig {
  EndpointConfig keyword;
  EndpointConfig backlink;
  EndpointConfig related;
  double requests_per_second = 1.0;  // per endpoint
  double per_host_delay = 2.0;       // seconds between fetches of one host
  double timeout_seconds = 10.0;
  std::string user_agent = "disco/0.1";
};

/// Replaces keys with DISCO_KEYWORD_KEY, DISCO_BACKLINK_KEY and
/// DISCO_RELATED_KEY when those are set.
void apply_env_keys(HttpProviderConfig& config);

/// Absolute http(s) URLs from a search API response. Understands
/// {"webPages":{"value":[{"url"}]}}, {"items":[{"link"}]}, {"results":[{"url"}]},
/// {"urls":[...]} and a bare array of strings. Throws ProviderError on bad JSON.
std::vector<std::string> parse_search_response(std::string_view body);

/// Search APIs and page fetching over HTTP(S).
class HttpSearchProvider : public SearchProvider {
 public:
  explicit HttpSearchProvider(HttpProviderConfig config);
  ~HttpSearchProvider() override;

  std::vector<std::string> keyword_search(std::string_view query, std::size_t limit) override;
  std::vector<std::string> backlink_search(std::string_view url, std::size_t limit) override;
  std::vector<std::string> related_search(std::string_view site_key, std::size_t limit) override;
  std::string fetch(std::string_view url) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Forwards to another provider and appends every exchange to a JSONL file
/// readable by ReplayProvider.
class RecordingProvider : public SearchProvider {
 public:
  RecordingProvider(SearchProvider& inner, std::string path);

  std::vector<std::string> keyword_search(std::string_view query, std::size_t limit) override;
  std::vector<std::string> backlink_search(std::string_view url, std::size_t limit) override;
  std::vector<std::string> related_search(std::string_view site_key, std::size_t limit) override;
  std::string fetch(std::string_view url) override;

 private:
  void append(const std::string& line);

  SearchProvider& inner_;
  std::string path_;
  std::mutex mutex_;
};

/// Serves recorded exchanges. Unrecorded searches throw OperatorUnavailable,
/// unrecorded fetches throw NotFound. A missing or unreadable fixture file
/// throws OperatorUnavailable from the constructor.
class ReplayProvider : public SearchProvider {
 public:
  explicit ReplayProvider(const std::string& path);

  std::vector<std::string> keyword_search(std::string_view query, std::size_t limit) override;
  std::vector<std::string> backlink_search(std::string_view url, std::size_t limit) override;
  std::vector<std::string> related_search(std::string_view site_key, std::size_t limit) override;
  std::string fetch(std::string_view url) override;

  std::size_t size() const { return responses_.size(); }

 private:
  struct Response {
    std::vector<std::string> urls;
    std::string html;
    std::string error;
  };
  const Response& lookup(std::string_view kind, std::string_view arg) const;
  std::vector<std::string> search(std::string_view kind, std::string_view arg,
                                  std::size_t limit) const;

  std::unordered_map<std::string, Response> responses_;
};

}  // namespace disco
