#pragma once

// Text and JSON renderings of scoring results.

#include "transrank/ranker.hpp"

#include <json.hpp>

#include <map>
#include <string>

namespace transrank {

/// "Rank i. '<name>': <score>" lines with aligned columns and 4 decimals.
std::string format_ranking(const RankingResult& result);

/// Single-model report; bestlayer adds one line per scored layer.
std::string format_model_score(const ModelScore& score);

nlohmann::json to_json(const RankerConfig& cfg);
nlohmann::json to_json(const Estimate& estimate);
nlohmann::json to_json(const ModelScore& score);
nlohmann::json to_json(const RankingResult& result);

/// Model -> score map from either a ranking report ({"entries": [...]}) or a
/// plain {"model": score} object.
std::map<std::string, double> scores_from_json(const nlohmann::json& doc);

}  // namespace transrank
