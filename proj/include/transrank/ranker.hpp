#pragma once

// Orchestration over TRDF dumps: downsample items once, pool and aggregate
// each model's hidden states, score every view, and order the models.

#include "transrank/aggregation.hpp"
#include "transrank/common.hpp"
#include "transrank/dump_format.hpp"
#include "transrank/estimators.hpp"
#include "transrank/pooling.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace transrank {

struct RankerConfig {
  EstimatorConfig estimator;
  LayerAggregation aggregation;
  WordPooling word_pooling = WordPooling::mean;
  /// Only meaningful for sequence tasks; unset means mean pooling.
  std::optional<SentencePooling> sentence_pooling;
  double downsample_fraction = 1.0;
  std::uint64_t seed = 42;
  /// Worker count; 0 means default_thread_count().
  std::size_t threads = 0;

  void validate() const;
};

struct LayerScore {
  std::uint32_t layer = 0;
  Estimate estimate;
};

struct ModelScore {
  std::string model_name;
  std::string source;
  double score = 0.0;
  /// The estimate behind `score` (the best layer's under bestlayer).
  Estimate estimate;
  /// Filled for bestlayer only, ascending by layer.
  std::vector<LayerScore> per_layer;
  std::optional<std::uint32_t> best_layer;
  std::size_t num_samples = 0;
};

struct DatasetFingerprint {
  TaskType task_type = TaskType::sequence;
  std::uint64_t num_items = 0;
  std::uint64_t retained_items = 0;
  std::vector<std::string> label_names;
};

struct RankingResult {
  RankerConfig config;
  DatasetFingerprint dataset;
  /// Sorted by score descending, then model name ascending.
  std::vector<ModelScore> entries;
};

/// Pooled feature views of one model together with their labels.
struct FeatureViews {
  std::vector<MatrixXd> views;
  /// Stored layer behind each view; empty for layermean.
  std::vector<std::uint32_t> view_layers;
  LabelVector labels;
};

/// Sorted indices of the items kept: max(2, round(fraction * n)) of them,
/// drawn without replacement by a partial Fisher-Yates shuffle driven by
/// SplitMix64(seed).
std::vector<std::uint64_t> downsample(std::uint64_t item_count, double fraction,
                                      std::uint64_t seed);

/// Streams the retained records of a dump into feature views. Rows follow
/// item order; token tasks contribute one row per word.
FeatureViews collect_features(DumpReader& reader, const RankerConfig& cfg,
                              std::span<const std::uint64_t> retained);

ModelScore score_views(const FeatureViews& features, const RankerConfig& cfg);

/// Scores one model. An empty `retained` keeps every item.
ModelScore score_model(DumpReader& reader, const RankerConfig& cfg,
                       std::span<const std::uint64_t> retained = {});
ModelScore score_model(const std::filesystem::path& dump, const RankerConfig& cfg,
                       std::span<const std::uint64_t> retained = {});

RankingResult rank(std::span<const std::filesystem::path> dumps,
                   const RankerConfig& cfg);

/// Orders entries by score descending, then name and source ascending.
void sort_entries(std::vector<ModelScore>& entries);

/// All *.trdf files directly inside `dir`, sorted by path.
std::vector<std::filesystem::path> find_dumps(const std::filesystem::path& dir);

}  // namespace transrank
