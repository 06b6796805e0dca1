#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "disco/corpus.hpp"
#include "disco/types.hpp"

namespace disco {

struct RankedItem {
  std::string site_key;
  double score = 0.0;

  bool operator==(const RankedItem&) const = default;
};

/// Websites in rank order; position 0 is best. Similarity and probability
/// scorers sort scores descending, the ensemble sorts ascending.
struct RankedList {
  RankerId ranker = RankerId::Ensemble;
  std::vector<RankedItem> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  /// site_key -> 0-based position.
  std::unordered_map<std::string, std::size_t> positions() const;

  bool operator==(const RankedList&) const = default;
};

/// The seed websites S. Non-empty with pairwise distinct site keys.
class SeedSet {
 public:
  explicit SeedSet(std::vector<WebsiteRecord> seeds);

  std::span<const WebsiteRecord> records() const { return seeds_; }
  std::size_t size() const { return seeds_.size(); }
  bool contains(const std::string& site_key) const;

 private:
  std::vector<WebsiteRecord> seeds_;
};

/// Pages presumed irrelevant; source of negatives for the binomial ranker.
struct NegativePool {
  std::vector<PageDoc> pages;
};

/// A candidate reduced to what the scorers need.
struct RankingItem {
  std::string site_key;
  SparseVector tf;
};

double jaccard(const SparseVector& x, const SparseVector& y);
double cosine(const SparseVector& x, const SparseVector& y);

enum class Similarity { Jaccard, Cosine };

/// Mean similarity to the seeds; jaccard uses the binary view of each vector.
RankedList similarity_rank(std::span<const RankingItem> candidates,
                           std::span<const SparseVector> seeds, Similarity sim);

// --- Bayesian Sets ----------------------------------------------------------
//
// Beta-Bernoulli set expansion over binary presence features. The closed-form
// log score per feature j, with a = c*m_j, b = c*(1-m_j), N seeds and s_j seeds
// containing j:
//   log(a+b) - log(a+b+N) + x_j (log(a+s_j) - log a) + (1-x_j)(log(b+N-s_j) - log b)
//
// Term-frequency input is binarized; the count model has no conjugate closed form.

/// (df_j + 0.5) / (num_documents + 1) for every term in the vocabulary.
std::vector<double> smoothed_corpus_means(const Vocabulary& vocab);

/// Log scores for each candidate; throws DegenerateFeature if any mean is
/// outside (0, 1) and std::invalid_argument if c <= 0.
std::vector<double> bayesian_sets_scores(std::span<const SparseVector> candidates,
                                         std::span<const SparseVector> seeds,
                                         std::span<const double> corpus_means, double c);

RankedList bayesian_sets_rank(std::span<const RankingItem> candidates,
                              std::span<const SparseVector> seeds,
                              std::span<const double> corpus_means, double c = 2.0);

// --- Binomial (logistic) regression ---------------------------------------

struct LogisticParams {
  double learning_rate = 0.1;
  double l2 = 1e-3;
  int max_epochs = 500;
  double gradient_tolerance = 1e-6;
};

/// Mean log-loss plus (l2/2)*||w||^2 over dense features; the intercept is not
/// regularized. Labels are 0/1.
class LogisticObjective {
 public:
  LogisticObjective(std::vector<std::vector<double>> features, std::vector<int> labels,
                    double l2);

  std::size_t dim() const { return dim_; }
  double loss(std::span<const double> weights, double intercept) const;
  /// Writes d/dw into grad_w (size dim) and returns d/db.
  double gradient(std::span<const double> weights, double intercept,
                  std::span<double> grad_w) const;

 private:
  std::vector<std::vector<double>> features_;
  std::vector<int> labels_;
  double l2_;
  std::size_t dim_;
};

class LogisticModel {
 public:
  /// Full-batch gradient descent. Input vectors are L2-normalized first.
  static LogisticModel fit(std::span<const SparseVector> positives,
                           std::span<const SparseVector> negatives,
                           const LogisticParams& params = {});

  double probability(const SparseVector& x) const;
  double intercept() const { return intercept_; }
  int epochs_run() const { return epochs_; }

 private:
  std::unordered_map<TermId, double> weights_;
  double intercept_ = 0.0;
  int epochs_ = 0;
};

/// Samples |seeds| negatives uniformly without replacement from the pool
/// (deterministic in rng_seed), fits, and sorts by P(relevant).
/// Throws InsufficientNegatives when the pool is smaller than the seed set.
RankedList binomial_rank(std::span<const RankingItem> candidates,
                         std::span<const SparseVector> seeds,
                         std::span<const SparseVector> negative_pool, std::uint64_t rng_seed,
                         const LogisticParams& params = {});

/// Indices of the uniform sample binomial_rank draws.
std::vector<std::size_t> sample_negative_indices(std::size_t pool_size, std::size_t count,
                                                 std::uint64_t rng_seed);

// --- One-class max-margin -------------------------------------------------

struct OneClassParams {
  double nu = 0.5;
  int epochs = 1000;
};

/// Linear one-class model minimizing
///   1/2 ||v||^2 + 1/(nu n) sum_i max(0, rho - v.x_i) - rho
/// by subgradient descent with step 1/(lambda t), lambda = 1/(nu n). After the
/// descent rho is set to its exact minimizer for the final v.
class OneClassModel {
 public:
  /// Inputs are L2-normalized first.
  static OneClassModel fit(std::span<const SparseVector> positives,
                           const OneClassParams& params = {});

  double decision(const SparseVector& x) const;  // v.x - rho on the normalized x
  double rho() const { return rho_; }
  /// Primal objective at the fitted (v, rho) over the normalized training set.
  double objective() const { return objective_; }

 private:
  std::unordered_map<TermId, double> weights_;
  double rho_ = 0.0;
  double objective_ = 0.0;
};

RankedList oneclass_rank(std::span<const RankingItem> candidates,
                         std::span<const SparseVector> seeds, const OneClassParams& params = {});

// --- Ensemble ---------------------------------------------------------------

/// Mean 0-based position across the inputs, ascending; ties by site key.
/// Throws MismatchedCandidateSets unless every list covers the same keys.
RankedList ensemble_rank(std::span<const RankedList> lists);

// --- Pipeline ---------------------------------------------------------------

struct RankingOptions {
  RankerId ranker = RankerId::Ensemble;
  bool use_meta = true;
  double bs_c = 2.0;
  LogisticParams logistic;
  OneClassParams oneclass;
  std::uint64_t rng_seed = 0;
};

/// Scores pre-vectorized candidates. negative_pool is only consulted by the
/// binomial ranker (directly or inside the ensemble).
RankedList rank_items(std::span<const RankingItem> candidates,
                      std::span<const SparseVector> seeds,
                      std::span<const SparseVector> negative_pool, const Vocabulary& vocab,
                      const RankingOptions& options);

/// Runs the five ensemble members and returns each list plus the fused one.
std::map<RankerId, RankedList> rank_all(std::span<const RankingItem> candidates,
                                        std::span<const SparseVector> seeds,
                                        std::span<const SparseVector> negative_pool,
                                        const Vocabulary& vocab, const RankingOptions& options);

/// Convenience entry point over records: builds a vocabulary from seeds and
/// candidates, vectorizes, and ranks.
RankedList rank_websites(std::span<const WebsiteRecord> candidates, const SeedSet& seeds,
                         const NegativePool& negatives, const RankingOptions& options);

/// CSV with header `position,site_key,score,ranker`.
void write_ranked_csv(std::ostream& out, const RankedList& list);

}  // namespace disco
