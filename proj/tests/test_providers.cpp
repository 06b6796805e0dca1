#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "disco/error.hpp"
#include "disco/providers.hpp"
#include "support.hpp"

using namespace disco;
namespace fs = std::filesystem;

TEST(ProvidersTokenBucket, WaitsOnFakeClock) {
  double now = 0;
  std::vector<double> sleeps;
  TokenBucket bucket(2.0, 1.0, [&] { return now; }, [&](double s) {
    sleeps.push_back(s);
    now += s;
  });
  EXPECT_EQ(bucket.acquire(), 0.0);
  EXPECT_DOUBLE_EQ(bucket.acquire(), 0.5);
  EXPECT_FALSE(bucket.try_acquire());
  now += 0.25;
  EXPECT_FALSE(bucket.try_acquire());
  now += 0.25;
  EXPECT_TRUE(bucket.try_acquire());
  now += 100;
  EXPECT_TRUE(bucket.try_acquire());
  EXPECT_FALSE(bucket.try_acquire());  // burst of one
  EXPECT_EQ(sleeps.size(), 1u);
  EXPECT_THROW(TokenBucket(0.0), std::invalid_argument);
}

TEST(ProvidersProperty, TokenBucketRate) {
  test::Rng rng(51);
  for (int i = 0; i < 200; ++i) {
    double now = 0;
    const double rate = 0.1 + 10 * rng.unit();
    TokenBucket bucket(rate, 1.0, [&] { return now; }, [&](double s) { now += s; });
    const std::size_t n = rng.between(1, 50);
    for (std::size_t j = 0; j < n; ++j) {
      bucket.acquire();
      now += rng.coin(0.3) ? rng.unit() / rate : 0.0;
    }
    // n tokens need at least (n - 1) / rate seconds after the first.
    EXPECT_GE(now + 1e-9, static_cast<double>(n - 1) / rate);
  }
}

TEST(ProvidersParse, Formats) {
  EXPECT_EQ(parse_search_response(R"({"webPages":{"value":[{"url":"http://a.com/"},{"name":"x"}]}})"),
            (std::vector<std::string>{"http://a.com/"}));
  EXPECT_EQ(parse_search_response(R"({"items":[{"link":"https://b.org/x"}]})"),
            (std::vector<std::string>{"https://b.org/x"}));
  EXPECT_EQ(parse_search_response(R"({"results":[{"url":"http://c.net"}]})"),
            (std::vector<std::string>{"http://c.net"}));
  EXPECT_EQ(parse_search_response(R"({"urls":["http://d.io/","ftp://no.pe/","relative/x"]})"),
            (std::vector<std::string>{"http://d.io/"}));
  EXPECT_EQ(parse_search_response(R"(["http://e.com/"])"), (std::vector<std::string>{"http://e.com/"}));
  EXPECT_TRUE(parse_search_response(R"({"other":1})").empty());
  EXPECT_THROW(parse_search_response("{nope"), ProviderError);
}

TEST(ProvidersEnv, KeyOverride) {
  HttpProviderConfig c;
  c.keyword.key = "file";
  c.related.key = "file";
  setenv("DISCO_KEYWORD_KEY", "env", 1);
  unsetenv("DISCO_RELATED_KEY");
  apply_env_keys(c);
  EXPECT_EQ(c.keyword.key, "env");
  EXPECT_EQ(c.related.key, "file");
  unsetenv("DISCO_KEYWORD_KEY");
}

namespace {

/// Local HTTP server standing in for a search API and a few websites.
class LocalServer {
 public:
  LocalServer() {
    server_.Get("/search", [this](const httplib::Request& req, httplib::Response& res) {
      ++searches;
      last_query = req.get_param_value("q");
      last_count = req.get_param_value("count");
      last_key = req.get_param_value("key");
      last_header = req.get_header_value("X-Key");
      res.set_content(R"({"webPages":{"value":[{"url":"http://one.test/"},{"url":"http://two.test/"},{"url":"http://three.test/"}]}})",
                      "application/json");
    });
    server_.Get("/broken", [](const httplib::Request&, httplib::Response& res) {
      res.status = 503;
    });
    server_.Get("/page", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("<html><body>hello</body></html>", "text/html");
    });
    server_.Get("/gone", [](const httplib::Request&, httplib::Response& res) { res.status = 404; });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

  std::atomic<int> searches{0};
  std::string last_query, last_count, last_key, last_header;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

HttpProviderConfig local_config(const LocalServer& s) {
  HttpProviderConfig c;
  c.keyword.endpoint = s.url("/search");
  c.keyword.key = "secret";
  c.related.endpoint = s.url("/search");
  c.related.key = "hdr";
  c.related.key_header = "X-Key";
  c.backlink.endpoint = s.url("/broken");
  c.requests_per_second = 1000;
  c.per_host_delay = 0;
  c.timeout_seconds = 5;
  return c;
}

}  // namespace

TEST(ProvidersHttp, SearchAndFetch) {
  LocalServer server;
  HttpSearchProvider p(local_config(server));
  EXPECT_EQ(p.keyword_search("gun forum texas", 2), (std::vector<std::string>{"http://one.test/", "http://two.test/"}));
  EXPECT_EQ(server.last_query, "gun forum texas");
  EXPECT_EQ(server.last_count, "2");
  EXPECT_EQ(server.last_key, "secret");

  p.related_search("example.com", 50);
  EXPECT_EQ(server.last_query, "related:http://example.com");
  EXPECT_EQ(server.last_header, "hdr");
  EXPECT_TRUE(server.last_key.empty());

  EXPECT_THROW(p.backlink_search("http://a.com/", 5), ProviderError);
  EXPECT_EQ(p.fetch(server.url("/page")), "<html><body>hello</body></html>");
  EXPECT_THROW(p.fetch(server.url("/gone")), NotFound);
  EXPECT_THROW(p.fetch("ftp://x.com/"), FetchError);
  EXPECT_EQ(server.searches.load(), 2);

  HttpSearchProvider unconfigured{HttpProviderConfig{}};
  EXPECT_THROW(unconfigured.keyword_search("q", 1), ProviderError);
}

TEST(ProvidersHttp, PerHostDelay) {
  LocalServer server;
  auto c = local_config(server);
  c.per_host_delay = 0.2;
  HttpSearchProvider p(c);
  const auto start = std::chrono::steady_clock::now();
  p.fetch(server.url("/page"));
  p.fetch(server.url("/page"));
  p.fetch(server.url("/page"));
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_GE(elapsed, 0.4 - 0.01);
}

TEST(ProvidersReplay, RecordThenReplay) {
  const auto path = fs::temp_directory_path() / "disco_replay_test.jsonl";
  fs::remove(path);
  test::FakeProvider inner;
  inner.keyword["violin shop"] = {"http://a.test/", "http://b.test/"};
  inner.backlinks["http://a.test/"] = {"http://hub.test/"};
  inner.related["a.test"] = {"http://c.test/"};
  inner.pages["http://a.test/"] = "<html>a\n\"quoted\"</html>";
  {
    RecordingProvider rec(inner, path.string());
    EXPECT_EQ(rec.keyword_search("violin shop", 50).size(), 2u);
    rec.backlink_search("http://a.test/", 5);
    rec.related_search("a.test", 50);
    rec.fetch("http://a.test/");
    EXPECT_THROW(rec.fetch("http://missing.test/"), NotFound);
    inner.searches_fail = true;
    EXPECT_THROW(rec.keyword_search("broken", 50), ProviderError);
  }
  ReplayProvider replay(path.string());
  EXPECT_EQ(replay.size(), 6u);
  EXPECT_EQ(replay.keyword_search("violin shop", 50), inner.keyword["violin shop"]);
  EXPECT_EQ(replay.keyword_search("violin shop", 1), (std::vector<std::string>{"http://a.test/"}));
  EXPECT_EQ(replay.backlink_search("http://a.test/", 5), inner.backlinks["http://a.test/"]);
  EXPECT_EQ(replay.related_search("a.test", 50), inner.related["a.test"]);
  EXPECT_EQ(replay.fetch("http://a.test/"), inner.pages["http://a.test/"]);
  EXPECT_THROW(replay.fetch("http://missing.test/"), FetchError);  // recorded failure
  EXPECT_THROW(replay.fetch("http://never.test/"), NotFound);
  EXPECT_THROW(replay.keyword_search("broken", 50), ProviderError);
  EXPECT_THROW(replay.keyword_search("never recorded", 50), OperatorUnavailable);
  fs::remove(path);

  EXPECT_THROW(ReplayProvider("/nonexistent/fixture.jsonl"), OperatorUnavailable);
  std::ofstream(path) << "{not json}\n";
  EXPECT_THROW(ReplayProvider(path.string()), OperatorUnavailable);
  fs::remove(path);
}
