#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "disco/corpus.hpp"

namespace disco {

/// A static corpus with planted relevant pages, for offline ranking runs.
/// Relevant pages mix a shared domain vocabulary with one of several
/// sub-topic vocabularies; noise pages are drawn from a noise vocabulary, and
/// a fraction of them ("confusers") borrow domain terms.
struct PlantedSpec {
  std::uint64_t seed = 1;
  std::size_t n_relevant = 10;
  std::size_t n_noise = 1000;
  std::size_t n_negatives = 200;  // extra noise pages for the negative pool
  std::size_t n_domain_terms = 60;
  std::size_t n_subtopics = 3;
  std::size_t subtopic_terms = 15;
  std::size_t n_noise_terms = 800;
  std::size_t body_length = 80;
  double domain_fraction = 0.3;
  double subtopic_fraction = 0.3;
  double confuser_fraction = 0.1;
  double confuser_domain_fraction = 0.15;  // half the relevant pages' domain share
};

struct PlantedPage {
  std::string html;
  PageDoc doc;
  bool relevant = false;
  std::size_t subtopic = 0;  // relevant pages only
};

struct PlantedCorpus {
  std::vector<PlantedPage> relevant;  // subtopics assigned round-robin
  std::vector<PlantedPage> noise;
  std::vector<PlantedPage> negatives;
};

/// Deterministic in spec.seed. Throws std::invalid_argument on bad specs.
PlantedCorpus generate_planted(const PlantedSpec& spec);

}  // namespace disco
