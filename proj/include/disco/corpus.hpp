#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "disco/types.hpp"

namespace disco {

/// One fetched page.
struct PageDoc {
  std::string url;
  std::string site_key;
  std::vector<std::string> body_tokens;
  std::vector<std::string> meta_tokens;  // from <meta name="description|keywords">
  std::vector<std::string> outlinks;     // absolute URLs, first occurrence order
  double fetch_time = 0.0;

  bool operator==(const PageDoc&) const = default;
};

/// A website, represented by the best-scoring page seen for it so far.
struct WebsiteRecord {
  std::string site_key;
  PageDoc best_page;
  double best_score = 0.0;
  std::optional<OperatorId> discovered_by;  // empty for seeds
  std::uint32_t discovered_at_iteration = 0;

  bool operator==(const WebsiteRecord&) const = default;
};

using TermId = std::uint32_t;

/// Sparse non-negative vector; entries sorted by term id, zero weights never stored.
class SparseVector {
 public:
  using Entry = std::pair<TermId, double>;

  SparseVector() = default;
  /// Entries may arrive unsorted and with duplicates (weights are summed).
  explicit SparseVector(std::vector<Entry> entries);

  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double get(TermId id) const;

  double dot(const SparseVector& other) const;
  double norm() const;
  /// Copy with every weight replaced by 1.
  SparseVector binary() const;
  /// Copy scaled to unit L2 norm; the empty vector stays empty.
  SparseVector normalized() const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<Entry> entries_;
};

/// Term dictionary with per-term document frequencies. Ids are dense and
/// assigned in first-seen order.
class Vocabulary {
 public:
  /// Registers every token and bumps document frequency once per distinct token.
  void add_document(std::span<const std::string> tokens);
  void add_document(const PageDoc& doc, bool use_meta = true);

  std::optional<TermId> id(std::string_view token) const;
  const std::string& term(TermId id) const { return terms_[id]; }
  std::uint32_t doc_freq(TermId id) const { return doc_freq_[id]; }
  std::size_t size() const { return terms_.size(); }
  std::size_t num_documents() const { return num_docs_; }

  std::span<const std::string> terms() const { return terms_; }
  std::span<const std::uint32_t> doc_freqs() const { return doc_freq_; }

  /// Rebuild from persisted state; throws std::invalid_argument on inconsistency.
  static Vocabulary restore(std::vector<std::string> terms, std::vector<std::uint32_t> doc_freq,
                            std::size_t num_docs);

 private:
  std::unordered_map<std::string, TermId> term_to_id_;
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> doc_freq_;
  std::size_t num_docs_ = 0;
};

enum class VectorMode { TermFrequency, Binary };

/// Lowercasing, non-alphanumeric splitting tokenizer with a stopword filter.
/// Bytes >= 0x80 count as alphanumeric so UTF-8 words stay intact.
class Tokenizer {
 public:
  /// Uses the built-in English stopword list.
  Tokenizer();
  explicit Tokenizer(std::unordered_set<std::string> stopwords);

  /// One stopword per line; blank lines and lines starting with '#' are skipped.
  static Tokenizer from_stopword_file(const std::string& path);

  std::vector<std::string> operator()(std::string_view text) const;
  bool is_stopword(std::string_view token) const;

 private:
  std::unordered_set<std::string> stopwords_;
};

/// Tokenizes with the default tokenizer.
std::vector<std::string> tokenize(std::string_view text);

const std::unordered_set<std::string>& default_stopwords();

std::vector<std::string> extract_meta_tokens(std::string_view html,
                                             const Tokenizer& tokenizer = Tokenizer{});

/// Lowercased host without scheme, port, userinfo, or leading "www." labels.
/// Throws MalformedUrl.
std::string normalize_site_key(std::string_view url);

/// Resolves href against base; returns nullopt for non-http(s) or unparseable links.
std::optional<std::string> resolve_url(std::string_view base, std::string_view href);

/// Parses raw HTML into a PageDoc (tag-stripped body, meta tokens, absolute outlinks).
PageDoc parse_page(std::string_view url, std::string_view html, double fetch_time = 0.0,
                   const Tokenizer& tokenizer = Tokenizer{});

/// Out-of-vocabulary tokens are ignored. With use_meta the meta tokens are
/// counted alongside the body tokens.
SparseVector vectorize(const PageDoc& doc, const Vocabulary& vocab, VectorMode mode,
                       bool use_meta = true);

}  // namespace disco
