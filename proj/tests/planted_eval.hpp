#pragma once

#include <map>

#include "disco/eval.hpp"
#include "disco/planted.hpp"
#include "disco/ranking.hpp"

namespace disco::test {

/// Ranks the planted corpus with the first `use` relevant pages as seeds.
/// The first `listed` relevant pages are withheld from the candidates; the
/// remaining relevant pages are the truth. Returns every member list plus the
/// ensemble.
inline std::map<RankerId, RankedList> rank_planted(const PlantedCorpus& corpus, std::size_t listed,
                                                   std::size_t use, std::uint64_t rng_seed,
                                                   GroundTruth* truth = nullptr) {
  std::vector<WebsiteRecord> seeds, candidates;
  const auto record = [](const PlantedPage& p) {
    WebsiteRecord r;
    r.site_key = p.doc.site_key;
    r.best_page = p.doc;
    return r;
  };
  for (std::size_t i = 0; i < corpus.relevant.size(); ++i) {
    if (i < use) seeds.push_back(record(corpus.relevant[i]));
    if (i >= listed) {
      candidates.push_back(record(corpus.relevant[i]));
      if (truth) truth->relevant.insert(corpus.relevant[i].doc.site_key);
    }
  }
  for (const auto& p : corpus.noise) candidates.push_back(record(p));

  Vocabulary vocab;
  for (const auto& s : seeds) vocab.add_document(s.best_page);
  for (const auto& c : candidates) vocab.add_document(c.best_page);
  std::vector<SparseVector> seed_vecs, pool;
  for (const auto& s : seeds) seed_vecs.push_back(vectorize(s.best_page, vocab, VectorMode::TermFrequency));
  std::vector<RankingItem> items;
  for (const auto& c : candidates) {
    items.push_back({c.site_key, vectorize(c.best_page, vocab, VectorMode::TermFrequency)});
  }
  for (const auto& p : corpus.negatives) pool.push_back(vectorize(p.doc, vocab, VectorMode::TermFrequency));
  RankingOptions options;
  options.rng_seed = rng_seed;
  return rank_all(items, seed_vecs, pool, vocab, options);
}

}  // namespace disco::test
