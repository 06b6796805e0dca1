#include "disco/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "disco/error.hpp"

namespace disco {

namespace {

bool is_token_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

char lower_ascii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = lower_ascii(c);
  return out;
}

bool iequals_prefix(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > text.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (lower_ascii(text[pos + i]) != prefix[i]) return false;
  }
  return true;
}

std::size_t ifind(std::string_view text, std::string_view needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= text.size(); ++i) {
    if (iequals_prefix(text, i, needle)) return i;
  }
  return std::string_view::npos;
}

// Attribute scan of the inside of a tag, e.g. ` name="keywords" content='a, b'`.
std::vector<std::pair<std::string, std::string>> parse_attributes(std::string_view tag) {
  std::vector<std::pair<std::string, std::string>> attrs;
  std::size_t i = 0;
  const auto skip_ws = [&] {
    while (i < tag.size() && std::isspace(static_cast<unsigned char>(tag[i]))) ++i;
  };
  while (i < tag.size()) {
    skip_ws();
    const std::size_t name_start = i;
    while (i < tag.size() && !std::isspace(static_cast<unsigned char>(tag[i])) && tag[i] != '=' &&
           tag[i] != '/' && tag[i] != '>') {
      ++i;
    }
    if (i == name_start) {
      ++i;
      continue;
    }
    std::string name = to_lower(tag.substr(name_start, i - name_start));
    skip_ws();
    std::string value;
    if (i < tag.size() && tag[i] == '=') {
      ++i;
      skip_ws();
      if (i < tag.size() && (tag[i] == '"' || tag[i] == '\'')) {
        const char quote = tag[i++];
        const std::size_t end = tag.find(quote, i);
        const std::size_t stop = end == std::string_view::npos ? tag.size() : end;
        value = std::string(tag.substr(i, stop - i));
        i = stop == tag.size() ? stop : stop + 1;
      } else {
        const std::size_t start = i;
        while (i < tag.size() && !std::isspace(static_cast<unsigned char>(tag[i])) &&
               tag[i] != '>') {
          ++i;
        }
        value = std::string(tag.substr(start, i - start));
      }
    }
    attrs.emplace_back(std::move(name), std::move(value));
  }
  return attrs;
}

const std::string* find_attr(const std::vector<std::pair<std::string, std::string>>& attrs,
                             std::string_view name) {
  for (const auto& [k, v] : attrs) {
    if (k == name) return &v;
  }
  return nullptr;
}

// Calls fn(attribute-text) for every `<tagname ...>` occurrence.
template <class Fn>
void for_each_tag(std::string_view html, std::string_view tagname, Fn&& fn) {
  const std::string open = "<" + std::string(tagname);
  std::size_t pos = 0;
  while ((pos = ifind(html, open, pos)) != std::string_view::npos) {
    const std::size_t after = pos + open.size();
    if (after < html.size() && is_token_byte(static_cast<unsigned char>(html[after]))) {
      pos = after;  // e.g. <metadata>, <abbr>
      continue;
    }
    const std::size_t close = html.find('>', after);
    const std::size_t stop = close == std::string_view::npos ? html.size() : close;
    fn(html.substr(after, stop - after));
    pos = stop;
  }
}

std::string decode_entities(std::string_view text) {
  static const std::pair<std::string_view, std::string_view> kEntities[] = {
      {"&amp;", "&"}, {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&#39;", "'"},
      {"&apos;", "'"}, {"&nbsp;", " "}};
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    bool replaced = false;
    if (text[i] == '&') {
      for (const auto& [ent, rep] : kEntities) {
        if (iequals_prefix(text, i, ent)) {
          out += rep;
          i += ent.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out += text[i++];
  }
  return out;
}

// Removes `<name ...> ... </name>` blocks.
std::string drop_blocks(std::string_view html, std::string_view name) {
  std::string out;
  const std::string open = "<" + std::string(name);
  const std::string close = "</" + std::string(name);
  std::size_t pos = 0;
  while (true) {
    const std::size_t start = ifind(html, open, pos);
    if (start == std::string_view::npos) break;
    out.append(html.substr(pos, start - pos));
    const std::size_t end = ifind(html, close, start);
    if (end == std::string_view::npos) {
      pos = html.size();
      break;
    }
    const std::size_t gt = html.find('>', end);
    pos = gt == std::string_view::npos ? html.size() : gt + 1;
  }
  out.append(html.substr(std::min(pos, html.size())));
  return out;
}

std::string strip_tags(std::string_view html) {
  std::string cleaned = drop_blocks(html, "script");
  cleaned = drop_blocks(cleaned, "style");
  std::string out;
  out.reserve(cleaned.size());
  bool in_tag = false;
  for (std::size_t i = 0; i < cleaned.size(); ++i) {
    const char c = cleaned[i];
    if (!in_tag && c == '<') {
      if (cleaned.compare(i, 4, "<!--") == 0) {
        const std::size_t end = cleaned.find("-->", i + 4);
        i = end == std::string::npos ? cleaned.size() : end + 2;
        out += ' ';
        continue;
      }
      in_tag = true;
      out += ' ';
    } else if (in_tag && c == '>') {
      in_tag = false;
    } else if (!in_tag) {
      out += c;
    }
  }
  return decode_entities(out);
}

struct UrlParts {
  std::string scheme;
  std::string authority;
  std::string path;  // begins with '/' or is empty
  std::string query;
};

std::optional<UrlParts> split_url(std::string_view url) {
  const std::size_t sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  const std::string_view scheme = url.substr(0, sep);
  if (!std::isalpha(static_cast<unsigned char>(scheme[0]))) return std::nullopt;
  for (const char c : scheme) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') {
      return std::nullopt;
    }
  }
  UrlParts parts;
  parts.scheme = to_lower(scheme);
  std::string_view rest = url.substr(sep + 3);
  if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
  const std::size_t auth_end = rest.find_first_of("/?");
  parts.authority = std::string(rest.substr(0, auth_end));
  if (auth_end != std::string_view::npos) {
    std::string_view tail = rest.substr(auth_end);
    const std::size_t q = tail.find('?');
    parts.path = std::string(tail.substr(0, q));
    if (q != std::string_view::npos) parts.query = std::string(tail.substr(q));
  }
  return parts;
}

std::string remove_dot_segments(const std::string& path) {
  std::vector<std::string> segments;
  std::size_t i = 1;  // path starts with '/'
  while (i <= path.size()) {
    const std::size_t next = path.find('/', i);
    const std::string seg = path.substr(i, next == std::string::npos ? std::string::npos : next - i);
    if (seg == "..") {
      if (!segments.empty()) segments.pop_back();
      if (next == std::string::npos) segments.emplace_back();
    } else if (seg == ".") {
      if (next == std::string::npos) segments.emplace_back();
    } else {
      segments.push_back(seg);
    }
    if (next == std::string::npos) break;
    i = next + 1;
  }
  std::string out;
  for (const auto& s : segments) out += "/" + s;
  return out.empty() ? "/" : out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

// --- SparseVector ---------------------------------------------------------

SparseVector::SparseVector(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  for (const auto& e : entries) {
    if (!entries_.empty() && entries_.back().first == e.first) {
      entries_.back().second += e.second;
    } else {
      entries_.push_back(e);
    }
  }
  std::erase_if(entries_, [](const Entry& e) { return e.second == 0.0; });
}

double SparseVector::get(TermId id) const {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                                   [](const Entry& e, TermId t) { return e.first < t; });
  return (it != entries_.end() && it->first == id) ? it->second : 0.0;
}

double SparseVector::dot(const SparseVector& other) const {
  double sum = 0.0;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() && b != other.entries_.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      sum += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return sum;
}

double SparseVector::norm() const { return std::sqrt(dot(*this)); }

SparseVector SparseVector::binary() const {
  SparseVector out;
  out.entries_.reserve(entries_.size());
  for (const auto& [id, w] : entries_) out.entries_.emplace_back(id, 1.0);
  return out;
}

SparseVector SparseVector::normalized() const {
  const double n = norm();
  SparseVector out = *this;
  if (n > 0.0) {
    for (auto& e : out.entries_) e.second /= n;
  }
  return out;
}

// --- Vocabulary -----------------------------------------------------------

void Vocabulary::add_document(std::span<const std::string> tokens) {
  std::vector<TermId> seen;
  seen.reserve(tokens.size());
  for (const auto& tok : tokens) {
    auto [it, inserted] = term_to_id_.try_emplace(tok, static_cast<TermId>(terms_.size()));
    if (inserted) {
      terms_.push_back(tok);
      doc_freq_.push_back(0);
    }
    seen.push_back(it->second);
  }
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  for (const TermId id : seen) ++doc_freq_[id];
  ++num_docs_;
}

void Vocabulary::add_document(const PageDoc& doc, bool use_meta) {
  if (!use_meta) {
    add_document(doc.body_tokens);
    return;
  }
  std::vector<std::string> all = doc.body_tokens;
  all.insert(all.end(), doc.meta_tokens.begin(), doc.meta_tokens.end());
  add_document(all);
}

std::optional<TermId> Vocabulary::id(std::string_view token) const {
  const auto it = term_to_id_.find(std::string(token));
  if (it == term_to_id_.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::restore(std::vector<std::string> terms, std::vector<std::uint32_t> doc_freq,
                               std::size_t num_docs) {
  if (terms.size() != doc_freq.size()) {
    throw std::invalid_argument("vocabulary: terms and doc_freq differ in length");
  }
  Vocabulary v;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (doc_freq[i] == 0 || doc_freq[i] > num_docs) {
      throw std::invalid_argument("vocabulary: doc_freq out of range for '" + terms[i] + "'");
    }
    if (!v.term_to_id_.emplace(terms[i], static_cast<TermId>(i)).second) {
      throw std::invalid_argument("vocabulary: duplicate term '" + terms[i] + "'");
    }
  }
  v.terms_ = std::move(terms);
  v.doc_freq_ = std::move(doc_freq);
  v.num_docs_ = num_docs;
  return v;
}

// --- Tokenizer ------------------------------------------------------------

Tokenizer::Tokenizer() : stopwords_(default_stopwords()) {}

Tokenizer::Tokenizer(std::unordered_set<std::string> stopwords)
    : stopwords_(std::move(stopwords)) {}

Tokenizer Tokenizer::from_stopword_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stopword file: " + path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    words.insert(to_lower(t));
  }
  return Tokenizer(std::move(words));
}

bool Tokenizer::is_stopword(std::string_view token) const {
  return stopwords_.contains(std::string(token));
}

std::vector<std::string> Tokenizer::operator()(std::string_view text) const {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (current.size() >= 2 && !stopwords_.contains(current)) tokens.push_back(current);
    current.clear();
  };
  for (const char c : text) {
    if (is_token_byte(static_cast<unsigned char>(c))) {
      current += lower_ascii(c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> tokenize(std::string_view text) {
  static const Tokenizer tokenizer;
  return tokenizer(text);
}

// --- HTML -----------------------------------------------------------------

std::vector<std::string> extract_meta_tokens(std::string_view html, const Tokenizer& tokenizer) {
  std::string content;
  for_each_tag(html, "meta", [&](std::string_view inner) {
    const auto attrs = parse_attributes(inner);
    const std::string* name = find_attr(attrs, "name");
    if (name == nullptr) return;
    const std::string n = to_lower(trim(*name));
    if (n != "description" && n != "keywords") return;
    if (const std::string* value = find_attr(attrs, "content")) {
      content += decode_entities(*value);
      content += ' ';
    }
  });
  return tokenizer(content);
}

std::string normalize_site_key(std::string_view url) {
  const auto parts = split_url(trim(url));
  if (!parts) throw MalformedUrl("not an absolute URL: '" + std::string(url) + "'");
  std::string_view host = parts->authority;
  if (const auto at = host.rfind('@'); at != std::string_view::npos) host = host.substr(at + 1);
  if (!host.empty() && host.front() == '[') {
    const auto close = host.find(']');
    if (close == std::string_view::npos) throw MalformedUrl("bad IPv6 host in '" + std::string(url) + "'");
    return to_lower(host.substr(0, close + 1));
  }
  if (const auto colon = host.find(':'); colon != std::string_view::npos) {
    const auto port = host.substr(colon + 1);
    if (!std::all_of(port.begin(), port.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; })) {
      throw MalformedUrl("bad port in '" + std::string(url) + "'");
    }
    host = host.substr(0, colon);
  }
  std::string key = to_lower(host);
  while (!key.empty() && key.back() == '.') key.pop_back();
  while (key.starts_with("www.")) key.erase(0, 4);
  if (key.empty()) throw MalformedUrl("empty host in '" + std::string(url) + "'");
  for (const char c : key) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '-' || c == '.' || c == '_' || u >= 0x80)) {
      throw MalformedUrl("invalid host character in '" + std::string(url) + "'");
    }
  }
  return key;
}

std::optional<std::string> resolve_url(std::string_view base, std::string_view href) {
  href = trim(href);
  if (href.empty() || href.front() == '#') return std::nullopt;
  std::string candidate;
  if (const auto colon = href.find(':');
      colon != std::string_view::npos && href.find_first_of("/?#") > colon) {
    const std::string scheme = to_lower(href.substr(0, colon));
    if (scheme != "http" && scheme != "https") return std::nullopt;
    candidate = std::string(href);
  } else {
    const auto b = split_url(base);
    if (!b) return std::nullopt;
    if (href.starts_with("//")) {
      candidate = b->scheme + ":" + std::string(href);
    } else if (href.front() == '?') {
      candidate = b->scheme + "://" + b->authority + (b->path.empty() ? "/" : b->path) + std::string(href);
    } else {
      const auto q = href.find_first_of("?#");
      std::string path(href.substr(0, q));
      if (path.front() != '/') {
        path = (b->path.empty() ? "/" : b->path.substr(0, b->path.rfind('/') + 1)) + path;
      }
      candidate = b->scheme + "://" + b->authority + remove_dot_segments(path);
      if (q != std::string_view::npos && href[q] == '?') candidate += std::string(href.substr(q));
    }
  }
  if (const auto hash = candidate.find('#'); hash != std::string::npos) candidate.resize(hash);
  try {
    (void)normalize_site_key(candidate);
  } catch (const MalformedUrl&) {
    return std::nullopt;
  }
  return candidate;
}

PageDoc parse_page(std::string_view url, std::string_view html, double fetch_time,
                   const Tokenizer& tokenizer) {
  PageDoc doc;
  doc.url = std::string(url);
  doc.site_key = normalize_site_key(url);
  doc.fetch_time = fetch_time;
  doc.body_tokens = tokenizer(strip_tags(html));
  doc.meta_tokens = extract_meta_tokens(html, tokenizer);
  std::unordered_set<std::string> seen;
  for_each_tag(html, "a", [&](std::string_view inner) {
    const auto attrs = parse_attributes(inner);
    const std::string* href = find_attr(attrs, "href");
    if (href == nullptr) return;
    auto resolved = resolve_url(url, decode_entities(*href));
    if (resolved && seen.insert(*resolved).second) doc.outlinks.push_back(std::move(*resolved));
  });
  return doc;
}

SparseVector vectorize(const PageDoc& doc, const Vocabulary& vocab, VectorMode mode,
                       bool use_meta) {
  std::vector<SparseVector::Entry> entries;
  entries.reserve(doc.body_tokens.size() + (use_meta ? doc.meta_tokens.size() : 0));
  const auto add = [&](const std::vector<std::string>& tokens) {
    for (const auto& tok : tokens) {
      if (const auto id = vocab.id(tok)) entries.emplace_back(*id, 1.0);
    }
  };
  add(doc.body_tokens);
  if (use_meta) add(doc.meta_tokens);
  SparseVector tf(std::move(entries));
  return mode == VectorMode::Binary ? tf.binary() : tf;
}

const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> words = {
#include "stopwords.inc"
  };
  return words;
}

}  // namespace disco
