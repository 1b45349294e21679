#include "transrank/ranker.hpp"

#include "transrank/error.hpp"
#include "transrank/parallel.hpp"
#include "transrank/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>

namespace transrank {
namespace {

std::size_t resolve_threads(std::size_t threads) {
  return threads == 0 ? default_thread_count() : threads;
}

// Appends the rows of `m` to a row-major buffer.
void append_rows(std::vector<double>& buffer, const MatrixXd& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) buffer.push_back(m(r, c));
  }
}

}  // namespace

void RankerConfig::validate() const {
  if (!(downsample_fraction > 0.0 && downsample_fraction <= 1.0)) {
    std::ostringstream msg;
    msg << "downsample fraction must lie in (0, 1], got " << downsample_fraction;
    throw ValidationError(msg.str());
  }
  if (estimator.knn.k == 0) throw ConfigError("knn k must be positive");
  if (estimator.knn.batch_size == 0) throw ConfigError("knn batch size must be positive");
}

std::vector<std::uint64_t> downsample(std::uint64_t item_count, double fraction,
                                      std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    std::ostringstream msg;
    msg << "downsample fraction must lie in (0, 1], got " << fraction;
    throw ValidationError(msg.str());
  }
  const auto scaled =
      static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(item_count)));
  const std::uint64_t keep = std::max<std::uint64_t>(2, scaled);
  if (keep > item_count) {
    throw ValidationError("downsampling keeps fewer than 2 of " +
                          std::to_string(item_count) + " items");
  }
  std::vector<std::uint64_t> indices(item_count);
  std::iota(indices.begin(), indices.end(), std::uint64_t{0});
  if (keep == item_count) return indices;

  SplitMix64 rng(seed);
  for (std::uint64_t i = 0; i < keep; ++i) {
    const std::uint64_t j = i + rng.below(item_count - i);
    std::swap(indices[i], indices[j]);
  }
  indices.resize(keep);
  std::sort(indices.begin(), indices.end());
  return indices;
}

FeatureViews collect_features(DumpReader& reader, const RankerConfig& cfg,
                              std::span<const std::uint64_t> retained) {
  const DumpHeader& header = reader.header();
  if (header.task_type == TaskType::token && cfg.sentence_pooling) {
    throw ConfigError("'" + header.model_name +
                      "' holds a token-level task; sentence pooling does not apply");
  }
  const SentencePooling sentence = cfg.sentence_pooling.value_or(SentencePooling::mean);
  const auto view_layers = cfg.aggregation.view_layers(header.num_layers);
  if (cfg.aggregation.selected_layers(header.num_layers).empty()) {
    throw ValidationError("no layers selected for aggregation");
  }

  std::vector<std::uint64_t> all;
  if (retained.empty()) {
    all.resize(header.num_items);
    std::iota(all.begin(), all.end(), std::uint64_t{0});
    retained = all;
  }
  if (retained.back() >= header.num_items) {
    throw ValidationError("retained index " + std::to_string(retained.back()) +
                          " outside dump of " + std::to_string(header.num_items) +
                          " items");
  }

  const std::size_t num_views =
      cfg.aggregation.strategy == LayerStrategy::bestlayer ? view_layers.size() : 1;
  std::vector<std::vector<double>> buffers(num_views);
  std::vector<int> labels;
  std::vector<MatrixXd> layers(header.num_layers);

  std::size_t next = 0;
  while (next < retained.size()) {
    if (reader.position() < retained[next]) {
      reader.skip();
      continue;
    }
    auto record = reader.next();
    if (!record) break;
    ++next;

    for (std::uint32_t l = 0; l < header.num_layers; ++l) {
      MatrixXd words = pool_words<double>(*record, l, cfg.word_pooling);
      if (header.task_type == TaskType::sequence) {
        layers[l] = pool_sentence(words, *record, l, sentence).transpose();
      } else {
        layers[l] = std::move(words);
      }
    }
    const auto views = build_views(layers, cfg.aggregation);
    for (std::size_t v = 0; v < num_views; ++v) append_rows(buffers[v], views[v]);
    labels.insert(labels.end(), record->labels.begin(), record->labels.end());
  }

  FeatureViews out;
  out.view_layers = view_layers;
  const auto rows = static_cast<Index>(labels.size());
  const auto dim = static_cast<Index>(header.hidden_dim);
  for (auto& buffer : buffers) {
    out.views.push_back(Eigen::Map<const RowMatrix<double>>(buffer.data(), rows, dim));
    std::vector<double>().swap(buffer);
  }
  out.labels.ids = Eigen::Map<const VectorXi>(labels.data(), rows);
  out.labels.num_classes = static_cast<int>(header.label_names.size());
  if (out.labels.classes_present() < 2) {
    throw ValidationError("'" + header.model_name + "': fewer than 2 classes among " +
                          std::to_string(rows) +
                          " retained samples; use a larger downsample fraction");
  }
  return out;
}

ModelScore score_views(const FeatureViews& features, const RankerConfig& cfg) {
  ModelScore result;
  result.num_samples = static_cast<std::size_t>(features.labels.size());
  EstimatorConfig est = cfg.estimator;
  if (est.knn.threads == 0) est.knn.threads = resolve_threads(cfg.threads);

  if (cfg.aggregation.strategy != LayerStrategy::bestlayer) {
    result.estimate = estimate(features.views.front(), features.labels, est);
    result.score = result.estimate.score;
    return result;
  }

  std::vector<Estimate> estimates(features.views.size());
  parallel_for(features.views.size(), resolve_threads(cfg.threads), [&](std::size_t v) {
    estimates[v] = estimate(features.views[v], features.labels, est);
  });
  std::size_t best = 0;
  for (std::size_t v = 0; v < estimates.size(); ++v) {
    result.per_layer.push_back({features.view_layers[v], estimates[v]});
    if (estimates[v].score > estimates[best].score) best = v;
  }
  result.best_layer = features.view_layers[best];
  result.estimate = estimates[best];
  result.score = estimates[best].score;
  return result;
}

ModelScore score_model(DumpReader& reader, const RankerConfig& cfg,
                       std::span<const std::uint64_t> retained) {
  cfg.validate();
  const FeatureViews features = collect_features(reader, cfg, retained);
  ModelScore result = score_views(features, cfg);
  result.model_name = reader.header().model_name;
  return result;
}

ModelScore score_model(const std::filesystem::path& dump, const RankerConfig& cfg,
                       std::span<const std::uint64_t> retained) {
  DumpReader reader = DumpReader::open(dump);
  ModelScore result = score_model(reader, cfg, retained);
  result.source = dump.string();
  return result;
}

void sort_entries(std::vector<ModelScore>& entries) {
  std::sort(entries.begin(), entries.end(), [](const ModelScore& a, const ModelScore& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.model_name != b.model_name) return a.model_name < b.model_name;
    return a.source < b.source;
  });
}

RankingResult rank(std::span<const std::filesystem::path> dumps,
                   const RankerConfig& cfg) {
  cfg.validate();
  if (dumps.empty()) throw ValidationError("no dumps to rank");

  std::vector<std::filesystem::path> paths(dumps.begin(), dumps.end());
  std::sort(paths.begin(), paths.end());

  std::vector<DumpHeader> headers;
  headers.reserve(paths.size());
  for (const auto& p : paths) headers.push_back(DumpReader::open(p).header());

  const DumpHeader& reference = headers.front();
  std::vector<std::string> offenders;
  for (std::size_t i = 1; i < headers.size(); ++i) {
    const DumpHeader& h = headers[i];
    if (h.task_type != reference.task_type || h.num_items != reference.num_items ||
        h.label_names != reference.label_names) {
      offenders.push_back(paths[i].string());
    }
  }
  if (!offenders.empty()) {
    std::string msg = "dumps disagree with '" + paths.front().string() +
                      "' on task type, item count or label names:";
    for (const auto& o : offenders) msg += " " + o;
    throw ValidationError(msg);
  }

  const auto retained =
      downsample(reference.num_items, cfg.downsample_fraction, cfg.seed);

  const std::size_t threads = resolve_threads(cfg.threads);
  RankerConfig inner = cfg;
  inner.threads = std::max<std::size_t>(1, threads / paths.size());

  std::vector<ModelScore> entries(paths.size());
  parallel_for(paths.size(), threads, [&](std::size_t i) {
    entries[i] = score_model(paths[i], inner, retained);
  });
  sort_entries(entries);

  RankingResult result;
  result.config = cfg;
  result.dataset.task_type = reference.task_type;
  result.dataset.num_items = reference.num_items;
  result.dataset.retained_items = retained.size();
  result.dataset.label_names = reference.label_names;
  result.entries = std::move(entries);
  return result;
}

std::vector<std::filesystem::path> find_dumps(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw IoError("'" + dir.string() + "' is not a readable directory");
  }
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".trdf") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("TRANSFER_RANK_THREADS")) {
    char* end = nullptr;
    const unsigned long value = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return value;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace transrank
