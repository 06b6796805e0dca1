#include "disco/types.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace disco {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(OperatorId op) {
  switch (op) {
    case OperatorId::Forward: return "FORWARD";
    case OperatorId::Backward: return "BACKWARD";
    case OperatorId::Keyword: return "KEYWORD";
    case OperatorId::Related: return "RELATED";
  }
  return "UNKNOWN";
}

std::string_view to_string(RankerId ranker) {
  switch (ranker) {
    case RankerId::Jaccard: return "JACCARD";
    case RankerId::Cosine: return "COSINE";
    case RankerId::BayesianSets: return "BS";
    case RankerId::OneClass: return "ONECLASS";
    case RankerId::Binomial: return "BINOMIAL";
    case RankerId::Ensemble: return "ENSEMBLE";
  }
  return "UNKNOWN";
}

std::optional<OperatorId> parse_operator(std::string_view name) {
  const auto n = lower(name);
  if (n == "forward") return OperatorId::Forward;
  if (n == "backward") return OperatorId::Backward;
  if (n == "keyword") return OperatorId::Keyword;
  if (n == "related") return OperatorId::Related;
  return std::nullopt;
}

std::optional<RankerId> parse_ranker(std::string_view name) {
  const auto n = lower(name);
  if (n == "jaccard") return RankerId::Jaccard;
  if (n == "cosine") return RankerId::Cosine;
  if (n == "bs" || n == "bayesian_sets" || n == "bayesiansets") return RankerId::BayesianSets;
  if (n == "oneclass" || n == "one_class") return RankerId::OneClass;
  if (n == "binomial") return RankerId::Binomial;
  if (n == "ensemble") return RankerId::Ensemble;
  return std::nullopt;
}

}  // namespace disco
