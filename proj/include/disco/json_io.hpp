#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>

#include "disco/bandit.hpp"
#include "disco/corpus.hpp"
#include "disco/operators.hpp"
#include "disco/ranking.hpp"
#include "disco/simweb.hpp"

namespace disco {

using json = nlohmann::json;

void to_json(json& j, const PageDoc& p);
void from_json(const json& j, PageDoc& p);
void to_json(json& j, const WebsiteRecord& r);
void from_json(const json& j, WebsiteRecord& r);
void to_json(json& j, const RankedList& l);
void from_json(const json& j, RankedList& l);
void to_json(json& j, const OperatorStats& s);
void from_json(const json& j, OperatorStats& s);
void to_json(json& j, const KeywordState& k);
void from_json(const json& j, KeywordState& k);

/// Spec fields are all optional when reading; missing ones keep their defaults.
/// Unknown fields throw SpecError.
void to_json(json& j, const SimWebSpec& s);
void from_json(const json& j, SimWebSpec& s);
void to_json(json& j, const SimPage& p);
void from_json(const json& j, SimPage& p);

json simweb_to_json(const SimWeb& web);
/// Throws SpecError on structural problems.
SimWeb simweb_from_json(const json& j);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Reads and parses a JSON file; std::runtime_error on I/O failure, json
/// parse_error on bad syntax.
json read_json_file(const std::string& path);
/// Writes via a temporary file and rename.
void write_text_file(const std::string& path, std::string_view text);

}  // namespace disco
