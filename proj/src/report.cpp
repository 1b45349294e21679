#include "transrank/report.hpp"

#include "transrank/error.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace transrank {
namespace {

using nlohmann::json;

std::string fixed4(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string format_ranking(const RankingResult& result) {
  std::vector<std::string> labels;
  std::vector<std::string> names;
  std::size_t label_width = 0;
  std::size_t name_width = 0;
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    labels.push_back("Rank " + std::to_string(i + 1) + ".");
    names.push_back("'" + result.entries[i].model_name + "':");
    label_width = std::max(label_width, labels.back().size());
    name_width = std::max(name_width, names.back().size());
  }
  std::string out;
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    out += pad(labels[i], label_width + 1) + pad(names[i], name_width + 1) +
           fixed4(result.entries[i].score) + "\n";
  }
  return out;
}

std::string format_model_score(const ModelScore& score) {
  std::string out = "'" + score.model_name + "': " + fixed4(score.score) + "\n";
  if (score.best_layer) out += "best layer: " + std::to_string(*score.best_layer) + "\n";
  for (const auto& layer : score.per_layer) {
    out += "layer " + std::to_string(layer.layer) + ": " +
           fixed4(layer.estimate.score) + "\n";
  }
  return out;
}

json to_json(const RankerConfig& cfg) {
  json j;
  j["estimator"] = to_string(cfg.estimator.kind);
  j["aggregation"] = to_string(cfg.aggregation.strategy);
  j["include_embedding_layer"] = cfg.aggregation.include_embedding_layer;
  j["word_pooling"] = to_string(cfg.word_pooling);
  j["sentence_pooling"] =
      std::string(to_string(cfg.sentence_pooling.value_or(SentencePooling::mean)));
  j["downsample"] = cfg.downsample_fraction;
  j["seed"] = cfg.seed;
  j["knn_k"] = cfg.estimator.knn.k;
  j["knn_batch_size"] = cfg.estimator.knn.batch_size;
  j["shrinkage"] = to_string(cfg.estimator.hscore.shrinkage);
  return j;
}

json to_json(const Estimate& estimate) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        json j;
        if constexpr (std::is_same_v<T, HscoreResult>) {
          j["shrinkage_intensity"] = d.shrinkage_intensity;
          j["degenerate"] = d.degenerate;
        } else if constexpr (std::is_same_v<T, LogmeResult>) {
          j["converged"] = d.converged();
          json classes = json::array();
          for (const auto& s : d.per_class) {
            classes.push_back({{"class", s.class_id},
                               {"alpha", s.alpha},
                               {"beta", s.beta},
                               {"evidence", s.evidence},
                               {"iterations", s.iterations},
                               {"converged", s.converged}});
          }
          j["classes"] = std::move(classes);
        } else {
          j["k"] = d.k;
          j["n"] = d.n;
        }
        return j;
      },
      estimate.details);
}

json to_json(const ModelScore& score) {
  json j;
  j["model"] = score.model_name;
  j["score"] = score.score;
  if (!score.per_layer.empty()) {
    json layers = json::array();
    for (const auto& l : score.per_layer) {
      layers.push_back({{"layer", l.layer}, {"score", l.estimate.score}});
    }
    j["per_layer_scores"] = std::move(layers);
    j["best_layer"] = *score.best_layer;
  }
  json diagnostics = to_json(score.estimate);
  diagnostics["num_samples"] = score.num_samples;
  j["diagnostics"] = std::move(diagnostics);
  return j;
}

json to_json(const RankingResult& result) {
  json j;
  j["config"] = to_json(result.config);
  j["dataset"] = {{"task_type", std::string(to_string(result.dataset.task_type))},
                  {"num_items", result.dataset.num_items},
                  {"retained_items", result.dataset.retained_items},
                  {"num_classes", result.dataset.label_names.size()},
                  {"label_names", result.dataset.label_names}};
  json entries = json::array();
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    json e = to_json(result.entries[i]);
    e["rank"] = i + 1;
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  return j;
}

std::map<std::string, double> scores_from_json(const json& doc) {
  std::map<std::string, double> out;
  try {
    if (doc.is_object() && doc.contains("entries")) {
      for (const auto& e : doc.at("entries")) {
        out[e.at("model").get<std::string>()] = e.at("score").get<double>();
      }
    } else if (doc.is_object()) {
      for (const auto& [name, value] : doc.items()) out[name] = value.get<double>();
    } else {
      throw ValidationError("expected a JSON object of model scores");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed score file: ") + e.what());
  }
  return out;
}

}  // namespace transrank
