#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace disco {

enum class OperatorId : std::uint8_t { Forward = 0, Backward = 1, Keyword = 2, Related = 3 };

/// Registry order; also the tie-break order for operator selection.
inline constexpr std::array<OperatorId, 4> kOperators = {
    OperatorId::Forward, OperatorId::Backward, OperatorId::Keyword, OperatorId::Related};

enum class RankerId : std::uint8_t { Jaccard, Cosine, BayesianSets, OneClass, Binomial, Ensemble };

/// The functions fused by the ensemble.
inline constexpr std::array<RankerId, 5> kEnsembleMembers = {
    RankerId::Jaccard, RankerId::Cosine, RankerId::BayesianSets, RankerId::OneClass,
    RankerId::Binomial};

std::string_view to_string(OperatorId op);
std::string_view to_string(RankerId ranker);

/// Case-insensitive; accepts "forward", "FORWARD", ...
std::optional<OperatorId> parse_operator(std::string_view name);
/// Case-insensitive; accepts "bs" and "bayesian_sets" for BayesianSets.
std::optional<RankerId> parse_ranker(std::string_view name);

constexpr std::size_t index_of(OperatorId op) { return static_cast<std::size_t>(op); }

}  // namespace disco
