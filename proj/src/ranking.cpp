#include "disco/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "disco/error.hpp"

namespace disco {

namespace {

void sort_descending(std::vector<RankedItem>& items) {
  std::sort(items.begin(), items.end(), [](const RankedItem& a, const RankedItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.site_key < b.site_key;
  });
}

void sort_ascending(std::vector<RankedItem>& items) {
  std::sort(items.begin(), items.end(), [](const RankedItem& a, const RankedItem& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.site_key < b.site_key;
  });
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-s)) without overflow.
double log1p_exp_neg(double s) { return std::log1p(std::exp(-std::abs(s))) + std::max(0.0, -s); }

/// Maps the union of supports to dense local columns.
struct LocalFeatures {
  std::vector<TermId> columns;
  std::unordered_map<TermId, std::size_t> index;

  void add(const SparseVector& v) {
    for (const auto& [id, w] : v.entries()) {
      if (index.emplace(id, columns.size()).second) columns.push_back(id);
    }
  }

  std::vector<double> dense(const SparseVector& v) const {
    std::vector<double> row(columns.size(), 0.0);
    for (const auto& [id, w] : v.entries()) row[index.at(id)] = w;
    return row;
  }
};

double dense_dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double sparse_dot_map(const SparseVector& x, const std::unordered_map<TermId, double>& w) {
  double sum = 0.0;
  for (const auto& [id, value] : x.entries()) {
    if (const auto it = w.find(id); it != w.end()) sum += value * it->second;
  }
  return sum;
}

std::vector<SparseVector> normalize_all(std::span<const SparseVector> vs) {
  std::vector<SparseVector> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(v.normalized());
  return out;
}

}  // namespace

std::unordered_map<std::string, std::size_t> RankedList::positions() const {
  std::unordered_map<std::string, std::size_t> pos;
  pos.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) pos.emplace(items[i].site_key, i);
  return pos;
}

SeedSet::SeedSet(std::vector<WebsiteRecord> seeds) : seeds_(std::move(seeds)) {
  if (seeds_.empty()) throw std::invalid_argument("seed set must not be empty");
  std::unordered_set<std::string> keys;
  for (const auto& s : seeds_) {
    if (!keys.insert(s.site_key).second) {
      throw std::invalid_argument("duplicate seed site: " + s.site_key);
    }
  }
}

bool SeedSet::contains(const std::string& site_key) const {
  return std::any_of(seeds_.begin(), seeds_.end(),
                     [&](const WebsiteRecord& r) { return r.site_key == site_key; });
}

// --- similarity -----------------------------------------------------------

double jaccard(const SparseVector& x, const SparseVector& y) {
  std::size_t common = 0;
  auto a = x.entries().begin();
  auto b = y.entries().begin();
  while (a != x.entries().end() && b != y.entries().end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      ++common;
      ++a;
      ++b;
    }
  }
  const std::size_t uni = x.size() + y.size() - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

double cosine(const SparseVector& x, const SparseVector& y) {
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return std::clamp(x.dot(y) / (nx * ny), 0.0, 1.0);
}

RankedList similarity_rank(std::span<const RankingItem> candidates,
                           std::span<const SparseVector> seeds, Similarity sim) {
  RankedList out;
  out.ranker = sim == Similarity::Jaccard ? RankerId::Jaccard : RankerId::Cosine;
  out.items.reserve(candidates.size());
  for (const auto& c : candidates) {
    double total = 0.0;
    for (const auto& s : seeds) total += sim == Similarity::Jaccard ? jaccard(c.tf, s) : cosine(c.tf, s);
    const double score = seeds.empty() ? 0.0 : total / static_cast<double>(seeds.size());
    out.items.push_back({c.site_key, score});
  }
  sort_descending(out.items);
  return out;
}

// --- Bayesian Sets --------------------------------------------------------

std::vector<double> smoothed_corpus_means(const Vocabulary& vocab) {
  std::vector<double> means(vocab.size());
  const double denom = static_cast<double>(vocab.num_documents()) + 1.0;
  for (std::size_t j = 0; j < vocab.size(); ++j) {
    means[j] = (static_cast<double>(vocab.doc_freq(static_cast<TermId>(j))) + 0.5) / denom;
  }
  return means;
}

std::vector<double> bayesian_sets_scores(std::span<const SparseVector> candidates,
                                         std::span<const SparseVector> seeds,
                                         std::span<const double> corpus_means, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("bayesian sets: c must be positive");
  const std::size_t dim = corpus_means.size();
  const double n = static_cast<double>(seeds.size());

  std::vector<double> seed_counts(dim, 0.0);
  for (const auto& s : seeds) {
    for (const auto& [id, w] : s.entries()) {
      if (id >= dim) throw std::out_of_range("bayesian sets: seed term outside corpus means");
      seed_counts[id] += 1.0;
    }
  }

  // Score of the all-zero vector plus a per-feature increment for x_j = 1.
  double base = 0.0;
  std::vector<double> delta(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const double m = corpus_means[j];
    if (!(m > 0.0 && m < 1.0)) {
      throw DegenerateFeature("bayesian sets: corpus mean of feature " + std::to_string(j) +
                              " is outside (0, 1)");
    }
    const double alpha = c * m;
    const double beta = c * (1.0 - m);
    const double s = seed_counts[j];
    const double absent = std::log(beta + n - s) - std::log(beta);
    base += std::log(alpha + beta) - std::log(alpha + beta + n) + absent;
    delta[j] = (std::log(alpha + s) - std::log(alpha)) - absent;
  }

  // Increments are summed in sorted order so that candidates whose feature
  // increments form the same multiset get bitwise identical scores and fall
  // through to the site-key tie-break.
  std::vector<double> scores;
  scores.reserve(candidates.size());
  std::vector<double> terms;
  for (const auto& x : candidates) {
    terms.clear();
    for (const auto& [id, w] : x.entries()) {
      if (id >= dim) throw std::out_of_range("bayesian sets: candidate term outside corpus means");
      terms.push_back(delta[id]);
    }
    std::sort(terms.begin(), terms.end());
    double increment = 0.0;
    for (const double t : terms) increment += t;
    // Equal likelihood ratios reached through different features can still
    // differ in the last bits once logged. Snapping to a 2^-32 grid makes them
    // tie exactly; genuinely distinct ratios sit far further apart.
    scores.push_back(std::round((base + increment) * 0x1p32) * 0x1p-32);
  }
  return scores;
}

RankedList bayesian_sets_rank(std::span<const RankingItem> candidates,
                              std::span<const SparseVector> seeds,
                              std::span<const double> corpus_means, double c) {
  std::vector<SparseVector> xs;
  xs.reserve(candidates.size());
  for (const auto& cand : candidates) xs.push_back(cand.tf.binary());
  const auto scores = bayesian_sets_scores(xs, seeds, corpus_means, c);
  RankedList out;
  out.ranker = RankerId::BayesianSets;
  out.items.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out.items.push_back({candidates[i].site_key, scores[i]});
  }
  sort_descending(out.items);
  return out;
}

// --- logistic -------------------------------------------------------------

LogisticObjective::LogisticObjective(std::vector<std::vector<double>> features,
                                     std::vector<int> labels, double l2)
    : features_(std::move(features)), labels_(std::move(labels)), l2_(l2) {
  if (features_.size() != labels_.size()) {
    throw std::invalid_argument("logistic: features and labels differ in length");
  }
  dim_ = features_.empty() ? 0 : features_.front().size();
  for (const auto& row : features_) {
    if (row.size() != dim_) throw std::invalid_argument("logistic: ragged feature rows");
  }
}

double LogisticObjective::loss(std::span<const double> weights, double intercept) const {
  double total = 0.0;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const double z = dense_dot(features_[i], weights) + intercept;
    total += log1p_exp_neg(labels_[i] == 1 ? z : -z);
  }
  const double m = features_.empty() ? 1.0 : static_cast<double>(features_.size());
  return total / m + 0.5 * l2_ * dense_dot(weights, weights);
}

double LogisticObjective::gradient(std::span<const double> weights, double intercept,
                                   std::span<double> grad_w) const {
  const double m = features_.empty() ? 1.0 : static_cast<double>(features_.size());
  for (std::size_t j = 0; j < dim_; ++j) grad_w[j] = l2_ * weights[j];
  double grad_b = 0.0;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const double z = dense_dot(features_[i], weights) + intercept;
    const double residual = (sigmoid(z) - labels_[i]) / m;
    for (std::size_t j = 0; j < dim_; ++j) grad_w[j] += residual * features_[i][j];
    grad_b += residual;
  }
  return grad_b;
}

LogisticModel LogisticModel::fit(std::span<const SparseVector> positives,
                                 std::span<const SparseVector> negatives,
                                 const LogisticParams& params) {
  const auto pos = normalize_all(positives);
  const auto neg = normalize_all(negatives);
  LocalFeatures local;
  for (const auto& v : pos) local.add(v);
  for (const auto& v : neg) local.add(v);

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (const auto& v : pos) {
    rows.push_back(local.dense(v));
    labels.push_back(1);
  }
  for (const auto& v : neg) {
    rows.push_back(local.dense(v));
    labels.push_back(0);
  }
  const LogisticObjective objective(std::move(rows), std::move(labels), params.l2);

  const std::size_t d = local.columns.size();
  std::vector<double> w(d, 0.0);
  std::vector<double> grad(d, 0.0);
  double b = 0.0;
  LogisticModel model;
  for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
    const double grad_b = objective.gradient(w, b, grad);
    const double gnorm = std::sqrt(dense_dot(grad, grad) + grad_b * grad_b);
    if (gnorm < params.gradient_tolerance) break;
    for (std::size_t j = 0; j < d; ++j) w[j] -= params.learning_rate * grad[j];
    b -= params.learning_rate * grad_b;
    model.epochs_ = epoch + 1;
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (w[j] != 0.0) model.weights_.emplace(local.columns[j], w[j]);
  }
  model.intercept_ = b;
  return model;
}

double LogisticModel::probability(const SparseVector& x) const {
  return sigmoid(sparse_dot_map(x.normalized(), weights_) + intercept_);
}

std::vector<std::size_t> sample_negative_indices(std::size_t pool_size, std::size_t count,
                                                 std::uint64_t rng_seed) {
  if (count > pool_size) {
    throw InsufficientNegatives("negative pool has " + std::to_string(pool_size) +
                                " pages, need " + std::to_string(count));
  }
  std::vector<std::size_t> idx(pool_size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(rng_seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (pool_size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

RankedList binomial_rank(std::span<const RankingItem> candidates,
                         std::span<const SparseVector> seeds,
                         std::span<const SparseVector> negative_pool, std::uint64_t rng_seed,
                         const LogisticParams& params) {
  const auto picks = sample_negative_indices(negative_pool.size(), seeds.size(), rng_seed);
  std::vector<SparseVector> negatives;
  negatives.reserve(picks.size());
  for (const auto i : picks) negatives.push_back(negative_pool[i]);
  const auto model = LogisticModel::fit(seeds, negatives, params);

  RankedList out;
  out.ranker = RankerId::Binomial;
  out.items.reserve(candidates.size());
  for (const auto& c : candidates) out.items.push_back({c.site_key, model.probability(c.tf)});
  sort_descending(out.items);
  return out;
}

// --- one-class ------------------------------------------------------------

OneClassModel OneClassModel::fit(std::span<const SparseVector> positives,
                                 const OneClassParams& params) {
  if (!(params.nu > 0.0 && params.nu <= 1.0)) {
    throw std::invalid_argument("one-class: nu must lie in (0, 1]");
  }
  OneClassModel model;
  if (positives.empty()) return model;

  const auto xs = normalize_all(positives);
  LocalFeatures local;
  for (const auto& v : xs) local.add(v);
  std::vector<std::vector<double>> rows;
  rows.reserve(xs.size());
  for (const auto& v : xs) rows.push_back(local.dense(v));

  const std::size_t d = local.columns.size();
  const double n = static_cast<double>(rows.size());
  const double c = 1.0 / (params.nu * n);
  const double lambda = 1.0 / (params.nu * n);

  std::vector<double> v(d, 0.0);
  std::vector<double> grad(d);
  std::vector<double> scores(rows.size());
  double rho = 0.0;
  for (int t = 1; t <= params.epochs; ++t) {
    const double eta = 1.0 / (lambda * t);
    std::size_t active = 0;
    grad.assign(v.begin(), v.end());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rho - dense_dot(v, rows[i]) > 0.0) {
        ++active;
        for (std::size_t j = 0; j < d; ++j) grad[j] -= c * rows[i][j];
      }
    }
    const double grad_rho = c * static_cast<double>(active) - 1.0;
    for (std::size_t j = 0; j < d; ++j) v[j] -= eta * grad[j];
    rho -= eta * grad_rho;
  }

  // Exact rho for the final v: the ceil(nu n)-th smallest training score.
  for (std::size_t i = 0; i < rows.size(); ++i) scores[i] = dense_dot(v, rows[i]);
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(params.nu * n - 1e-9));
  rho = sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];

  double hinge = 0.0;
  for (const double s : scores) hinge += std::max(0.0, rho - s);
  model.objective_ = 0.5 * dense_dot(v, v) + c * hinge - rho;
  model.rho_ = rho;
  for (std::size_t j = 0; j < d; ++j) {
    if (v[j] != 0.0) model.weights_.emplace(local.columns[j], v[j]);
  }
  return model;
}

double OneClassModel::decision(const SparseVector& x) const {
  return sparse_dot_map(x.normalized(), weights_) - rho_;
}

RankedList oneclass_rank(std::span<const RankingItem> candidates,
                         std::span<const SparseVector> seeds, const OneClassParams& params) {
  const auto model = OneClassModel::fit(seeds, params);
  RankedList out;
  out.ranker = RankerId::OneClass;
  out.items.reserve(candidates.size());
  for (const auto& c : candidates) out.items.push_back({c.site_key, model.decision(c.tf)});
  sort_descending(out.items);
  return out;
}

// --- ensemble -------------------------------------------------------------

RankedList ensemble_rank(std::span<const RankedList> lists) {
  RankedList out;
  out.ranker = RankerId::Ensemble;
  if (lists.empty()) return out;

  std::unordered_map<std::string, std::size_t> position_sum;
  position_sum.reserve(lists.front().size());
  for (std::size_t i = 0; i < lists.front().size(); ++i) {
    if (!position_sum.emplace(lists.front().items[i].site_key, i).second) {
      throw MismatchedCandidateSets("duplicate site in ranked list: " +
                                    lists.front().items[i].site_key);
    }
  }
  for (std::size_t l = 1; l < lists.size(); ++l) {
    if (lists[l].size() != lists.front().size()) {
      throw MismatchedCandidateSets("ranked lists differ in length");
    }
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < lists[l].size(); ++i) {
      const auto& key = lists[l].items[i].site_key;
      const auto it = position_sum.find(key);
      if (it == position_sum.end() || !seen.insert(key).second) {
        throw MismatchedCandidateSets("ranked lists disagree on site: " + key);
      }
      it->second += i;
    }
  }
  const double count = static_cast<double>(lists.size());
  out.items.reserve(position_sum.size());
  for (const auto& [key, sum] : position_sum) {
    out.items.push_back({key, static_cast<double>(sum) / count});
  }
  sort_ascending(out.items);
  return out;
}

// --- pipeline -------------------------------------------------------------

std::map<RankerId, RankedList> rank_all(std::span<const RankingItem> candidates,
                                        std::span<const SparseVector> seeds,
                                        std::span<const SparseVector> negative_pool,
                                        const Vocabulary& vocab, const RankingOptions& options) {
  std::map<RankerId, RankedList> out;
  const auto means = smoothed_corpus_means(vocab);
  out[RankerId::Jaccard] = similarity_rank(candidates, seeds, Similarity::Jaccard);
  out[RankerId::Cosine] = similarity_rank(candidates, seeds, Similarity::Cosine);
  out[RankerId::BayesianSets] = bayesian_sets_rank(candidates, seeds, means, options.bs_c);
  out[RankerId::OneClass] = oneclass_rank(candidates, seeds, options.oneclass);
  out[RankerId::Binomial] =
      binomial_rank(candidates, seeds, negative_pool, options.rng_seed, options.logistic);
  std::vector<RankedList> members;
  for (const auto id : kEnsembleMembers) members.push_back(out.at(id));
  out[RankerId::Ensemble] = ensemble_rank(members);
  return out;
}

RankedList rank_items(std::span<const RankingItem> candidates,
                      std::span<const SparseVector> seeds,
                      std::span<const SparseVector> negative_pool, const Vocabulary& vocab,
                      const RankingOptions& options) {
  if (candidates.empty()) return RankedList{options.ranker, {}};
  switch (options.ranker) {
    case RankerId::Jaccard: return similarity_rank(candidates, seeds, Similarity::Jaccard);
    case RankerId::Cosine: return similarity_rank(candidates, seeds, Similarity::Cosine);
    case RankerId::BayesianSets:
      return bayesian_sets_rank(candidates, seeds, smoothed_corpus_means(vocab), options.bs_c);
    case RankerId::OneClass: return oneclass_rank(candidates, seeds, options.oneclass);
    case RankerId::Binomial:
      return binomial_rank(candidates, seeds, negative_pool, options.rng_seed, options.logistic);
    case RankerId::Ensemble:
      return rank_all(candidates, seeds, negative_pool, vocab, options).at(RankerId::Ensemble);
  }
  throw std::invalid_argument("unknown ranker");
}

RankedList rank_websites(std::span<const WebsiteRecord> candidates, const SeedSet& seeds,
                         const NegativePool& negatives, const RankingOptions& options) {
  Vocabulary vocab;
  for (const auto& s : seeds.records()) vocab.add_document(s.best_page, options.use_meta);
  for (const auto& c : candidates) vocab.add_document(c.best_page, options.use_meta);

  std::vector<SparseVector> seed_vecs;
  for (const auto& s : seeds.records()) {
    seed_vecs.push_back(vectorize(s.best_page, vocab, VectorMode::TermFrequency, options.use_meta));
  }
  std::vector<RankingItem> items;
  items.reserve(candidates.size());
  for (const auto& c : candidates) {
    items.push_back(
        {c.site_key, vectorize(c.best_page, vocab, VectorMode::TermFrequency, options.use_meta)});
  }
  std::vector<SparseVector> pool;
  pool.reserve(negatives.pages.size());
  for (const auto& p : negatives.pages) {
    pool.push_back(vectorize(p, vocab, VectorMode::TermFrequency, options.use_meta));
  }
  return rank_items(items, seed_vecs, pool, vocab, options);
}

void write_ranked_csv(std::ostream& out, const RankedList& list) {
  out << "position,site_key,score,ranker\n";
  char buf[64];
  for (std::size_t i = 0; i < list.items.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", list.items[i].score);
    out << i << ',' << list.items[i].site_key << ',' << buf << ',' << to_string(list.ranker)
        << '\n';
  }
}

}  // namespace disco
