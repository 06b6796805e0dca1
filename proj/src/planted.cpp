#include "disco/planted.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

#include "disco/simweb.hpp"
#include "rng_util.hpp"

namespace disco {

using detail::below;
using detail::unit;

PlantedCorpus generate_planted(const PlantedSpec& spec) {
  if (spec.n_relevant == 0 || spec.n_subtopics == 0 || spec.body_length == 0) {
    throw std::invalid_argument("planted corpus needs relevant pages, sub-topics and text");
  }
  if (spec.n_domain_terms < 6 || spec.subtopic_terms < 2 || spec.n_noise_terms < 6) {
    throw std::invalid_argument("planted vocabulary pools too small");
  }
  const double rel_mass = spec.domain_fraction + spec.subtopic_fraction;
  if (spec.domain_fraction < 0 || spec.subtopic_fraction < 0 || rel_mass > 1.0 ||
      spec.confuser_fraction < 0 || spec.confuser_fraction > 1 ||
      spec.confuser_domain_fraction < 0 || spec.confuser_domain_fraction > 1) {
    throw std::invalid_argument("planted fractions out of range");
  }

  std::mt19937_64 rng(spec.seed);
  std::unordered_set<std::string> taken;
  const auto domain = detail::make_words(spec.n_domain_terms, rng, taken);
  std::vector<std::vector<std::string>> subtopics;
  for (std::size_t s = 0; s < spec.n_subtopics; ++s) {
    subtopics.push_back(detail::make_words(spec.subtopic_terms, rng, taken));
  }
  const auto noise = detail::make_words(spec.n_noise_terms, rng, taken);

  const std::size_t total = spec.n_relevant + spec.n_noise + spec.n_negatives;
  std::vector<std::size_t> host_ids(total);
  std::iota(host_ids.begin(), host_ids.end(), std::size_t{0});
  detail::shuffle(host_ids, rng);
  std::size_t next_host = 0;

  const auto pick = [&](const std::vector<std::string>& pool) { return pool[below(rng, pool.size())]; };
  const auto make_page = [&](const std::vector<std::string>* sub, double domain_share,
                             double sub_share) {
    SimPage p;
    char host[32];
    std::snprintf(host, sizeof host, "p%05zu.test", host_ids[next_host++]);
    p.site_key = host;
    p.url = std::string("http://") + host + "/";
    for (std::size_t i = 0; i < spec.body_length; ++i) {
      const double u = unit(rng);
      if (u < domain_share) {
        p.body.push_back(pick(domain));
      } else if (sub != nullptr && u < domain_share + sub_share) {
        p.body.push_back(pick(*sub));
      } else {
        p.body.push_back(pick(noise));
      }
    }
    if (sub != nullptr) {
      for (int i = 0; i < 4; ++i) p.meta.push_back(pick(domain));
      for (int i = 0; i < 2; ++i) p.meta.push_back(pick(*sub));
    } else {
      for (int i = 0; i < 4; ++i) p.meta.push_back(pick(noise));
    }
    p.title = p.meta[0] + " " + p.meta[1];
    PlantedPage out;
    out.html = SimWeb::render(p);
    out.doc = parse_page(p.url, out.html);
    return out;
  };

  PlantedCorpus corpus;
  for (std::size_t i = 0; i < spec.n_relevant; ++i) {
    const std::size_t s = i % spec.n_subtopics;
    auto page = make_page(&subtopics[s], spec.domain_fraction, spec.subtopic_fraction);
    page.relevant = true;
    page.subtopic = s;
    corpus.relevant.push_back(std::move(page));
  }
  const auto make_noise = [&] {
    const bool confuser = unit(rng) < spec.confuser_fraction;
    return make_page(nullptr, confuser ? spec.confuser_domain_fraction : 0.0, 0.0);
  };
  for (std::size_t i = 0; i < spec.n_noise; ++i) corpus.noise.push_back(make_noise());
  for (std::size_t i = 0; i < spec.n_negatives; ++i) corpus.negatives.push_back(make_noise());
  return corpus;
}

}  // namespace disco
