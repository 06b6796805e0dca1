#include "disco/json_io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "disco/error.hpp"

namespace disco {

namespace {

OperatorId operator_from_json(const json& j) {
  const auto op = parse_operator(j.get<std::string>());
  if (!op) throw std::invalid_argument("unknown operator " + j.dump());
  return *op;
}

}  // namespace

void to_json(json& j, const PageDoc& p) {
  j = json{{"url", p.url},
           {"site_key", p.site_key},
           {"body_tokens", p.body_tokens},
           {"meta_tokens", p.meta_tokens},
           {"outlinks", p.outlinks},
           {"fetch_time", p.fetch_time}};
}

void from_json(const json& j, PageDoc& p) {
  j.at("url").get_to(p.url);
  j.at("site_key").get_to(p.site_key);
  j.at("body_tokens").get_to(p.body_tokens);
  j.at("meta_tokens").get_to(p.meta_tokens);
  j.at("outlinks").get_to(p.outlinks);
  j.at("fetch_time").get_to(p.fetch_time);
}

void to_json(json& j, const WebsiteRecord& r) {
  j = json{{"site_key", r.site_key},
           {"best_page", r.best_page},
           {"best_score", r.best_score},
           {"discovered_by", r.discovered_by ? json(to_string(*r.discovered_by)) : json(nullptr)},
           {"discovered_at_iteration", r.discovered_at_iteration}};
}

void from_json(const json& j, WebsiteRecord& r) {
  j.at("site_key").get_to(r.site_key);
  j.at("best_page").get_to(r.best_page);
  j.at("best_score").get_to(r.best_score);
  const auto& by = j.at("discovered_by");
  r.discovered_by = by.is_null() ? std::nullopt : std::optional(operator_from_json(by));
  j.at("discovered_at_iteration").get_to(r.discovered_at_iteration);
}

void to_json(json& j, const RankedList& l) {
  json items = json::array();
  for (const auto& it : l.items) items.push_back(json::array({it.site_key, it.score}));
  j = json{{"ranker", to_string(l.ranker)}, {"items", std::move(items)}};
}

void from_json(const json& j, RankedList& l) {
  const auto r = parse_ranker(j.at("ranker").get<std::string>());
  if (!r) throw std::invalid_argument("unknown ranker");
  l.ranker = *r;
  l.items.clear();
  for (const auto& it : j.at("items")) {
    l.items.push_back({it.at(0).get<std::string>(), it.at(1).get<double>()});
  }
}

void to_json(json& j, const OperatorStats& s) {
  json arms = json::object();
  for (const auto op : kOperators) {
    const auto& a = s[op];
    arms[std::string(to_string(op))] =
        json{{"mean_reward", a.mean_reward}, {"retrieved", a.retrieved}, {"rounds", a.rounds}};
  }
  j = json{{"total_retrieved", s.total_retrieved}, {"arms", std::move(arms)}};
}

void from_json(const json& j, OperatorStats& s) {
  j.at("total_retrieved").get_to(s.total_retrieved);
  for (const auto op : kOperators) {
    const auto& a = j.at("arms").at(std::string(to_string(op)));
    a.at("mean_reward").get_to(s[op].mean_reward);
    a.at("retrieved").get_to(s[op].retrieved);
    a.at("rounds").get_to(s[op].rounds);
  }
}

void to_json(json& j, const KeywordState& k) {
  j = json{{"seed_keyword", k.seed_keyword},
           {"used_queries", k.used_queries},
           {"candidate_tokens", k.candidate_tokens}};
}

void from_json(const json& j, KeywordState& k) {
  j.at("seed_keyword").get_to(k.seed_keyword);
  k.used_queries = j.at("used_queries").get<std::set<std::string>>();
  j.at("candidate_tokens").get_to(k.candidate_tokens);
}

// --- SimWeb -----------------------------------------------------------------

void to_json(json& j, const SimWebSpec& s) {
  j = json{{"seed", s.seed},
           {"n_relevant", s.n_relevant},
           {"n_irrelevant", s.n_irrelevant},
           {"hub_count", s.hub_count},
           {"n_seeds", s.n_seeds},
           {"partition",
            {{"forward", s.partition.forward},
             {"backward", s.partition.backward},
             {"keyword", s.partition.keyword},
             {"related", s.partition.related},
             {"mixed", s.partition.mixed}}},
           {"n_domain_terms", s.n_domain_terms},
           {"n_meta_terms", s.n_meta_terms},
           {"n_noise_terms", s.n_noise_terms},
           {"seed_keyword", s.seed_keyword},
           {"body_length", s.body_length},
           {"domain_fraction", s.domain_fraction},
           {"meta_length", s.meta_length},
           {"near_junk", s.near_junk},
           {"spam_fraction", s.spam_fraction},
           {"forward_degree", s.forward_degree},
           {"mixed_degree", s.mixed_degree},
           {"junk_degree", s.junk_degree},
           {"hub_degree", s.hub_degree},
           {"hub_junk_degree", s.hub_junk_degree},
           {"hub_in_degree", s.hub_in_degree},
           {"junk_link_degree", s.junk_link_degree},
           {"related_degree", s.related_degree},
           {"related_junk", s.related_junk}};
}

void from_json(const json& j, SimWebSpec& s) {
  if (!j.is_object()) throw SpecError("simweb spec must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "seed") v.get_to(s.seed);
      else if (key == "n_relevant") v.get_to(s.n_relevant);
      else if (key == "n_irrelevant") v.get_to(s.n_irrelevant);
      else if (key == "hub_count") v.get_to(s.hub_count);
      else if (key == "n_seeds") v.get_to(s.n_seeds);
      else if (key == "partition") {
        for (const auto& [name, f] : v.items()) {
          if (name == "forward") f.get_to(s.partition.forward);
          else if (name == "backward") f.get_to(s.partition.backward);
          else if (name == "keyword") f.get_to(s.partition.keyword);
          else if (name == "related") f.get_to(s.partition.related);
          else if (name == "mixed") f.get_to(s.partition.mixed);
          else throw SpecError("unknown partition class '" + name + "'");
        }
      }
      else if (key == "n_domain_terms") v.get_to(s.n_domain_terms);
      else if (key == "n_meta_terms") v.get_to(s.n_meta_terms);
      else if (key == "n_noise_terms") v.get_to(s.n_noise_terms);
      else if (key == "seed_keyword") v.get_to(s.seed_keyword);
      else if (key == "body_length") v.get_to(s.body_length);
      else if (key == "domain_fraction") v.get_to(s.domain_fraction);
      else if (key == "meta_length") v.get_to(s.meta_length);
      else if (key == "near_junk") v.get_to(s.near_junk);
      else if (key == "spam_fraction") v.get_to(s.spam_fraction);
      else if (key == "forward_degree") v.get_to(s.forward_degree);
      else if (key == "mixed_degree") v.get_to(s.mixed_degree);
      else if (key == "junk_degree") v.get_to(s.junk_degree);
      else if (key == "hub_degree") v.get_to(s.hub_degree);
      else if (key == "hub_junk_degree") v.get_to(s.hub_junk_degree);
      else if (key == "hub_in_degree") v.get_to(s.hub_in_degree);
      else if (key == "junk_link_degree") v.get_to(s.junk_link_degree);
      else if (key == "related_degree") v.get_to(s.related_degree);
      else if (key == "related_junk") v.get_to(s.related_junk);
      else throw SpecError("unknown simweb spec field '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("bad simweb spec: ") + e.what());
  }
}

void to_json(json& j, const SimPage& p) {
  j = json{{"url", p.url},         {"site_key", p.site_key}, {"class", to_string(p.site_class)},
           {"seed", p.seed},       {"title", p.title},       {"body", p.body},
           {"meta", p.meta},       {"outlinks", p.outlinks}};
}

void from_json(const json& j, SimPage& p) {
  j.at("url").get_to(p.url);
  j.at("site_key").get_to(p.site_key);
  const auto c = parse_site_class(j.at("class").get<std::string>());
  if (!c) throw SpecError("unknown site class " + j.at("class").dump());
  p.site_class = *c;
  j.at("seed").get_to(p.seed);
  j.at("title").get_to(p.title);
  j.at("body").get_to(p.body);
  j.at("meta").get_to(p.meta);
  j.at("outlinks").get_to(p.outlinks);
}

json simweb_to_json(const SimWeb& web) {
  json pages = json::array();
  for (const auto& p : web.pages()) pages.push_back(p);
  return json{{"format", "disco-simweb/1"},
              {"spec", web.spec()},
              {"pages", std::move(pages)},
              {"related_map", web.related_map()}};
}

SimWeb simweb_from_json(const json& j) {
  try {
    if (j.value("format", "") != "disco-simweb/1") throw SpecError("not a simweb file");
    SimWebSpec spec;
    from_json(j.at("spec"), spec);
    auto pages = j.at("pages").get<std::vector<SimPage>>();
    auto related = j.at("related_map").get<std::map<std::string, std::vector<std::string>>>();
    return SimWeb(std::move(spec), std::move(pages), std::move(related));
  } catch (const json::exception& e) {
    throw SpecError(std::string("bad simweb file: ") + e.what());
  }
}

// --- files and hashing ------------------------------------------------------

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return json::parse(buf.str());
}

void write_text_file(const std::string& path, std::string_view text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace disco
