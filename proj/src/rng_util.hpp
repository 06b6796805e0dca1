#pragma once

// Portable sampling helpers. std::uniform_int_distribution and std::shuffle
// differ between standard libraries; these do not.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

namespace disco::detail {

inline std::size_t below(std::mt19937_64& rng, std::size_t n) {
  return n == 0 ? 0 : static_cast<std::size_t>(rng() % n);
}

inline double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(rng, i)]);
}

/// k distinct indices from [0, n) in random order (k clamped to n).
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                               std::mt19937_64& rng) {
  k = std::min(k, n);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + below(rng, n - i)]);
  idx.resize(k);
  return idx;
}

/// Pronounceable pseudo-words, distinct from each other, from `taken`, and
/// from the default stopwords.
std::vector<std::string> make_words(std::size_t n, std::mt19937_64& rng,
                                    std::unordered_set<std::string>& taken);

}  // namespace disco::detail
