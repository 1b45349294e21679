#include "transrank/fixtures.hpp"

#include "transrank/dump_format.hpp"
#include "transrank/error.hpp"
#include "transrank/random.hpp"

#include <sstream>

namespace transrank {

void FixtureSpec::validate() const {
  if (n_items < 1) throw ValidationError("fixture: n_items must be >= 1");
  if (n_classes < 2) throw ValidationError("fixture: n_classes must be >= 2");
  if (hidden_dim < static_cast<std::uint32_t>(n_classes)) {
    throw ValidationError("fixture: hidden_dim must be >= n_classes");
  }
  if (n_layers < 2) throw ValidationError("fixture: n_layers must be >= 2");
  if (signal_layer >= n_layers) {
    throw ValidationError("fixture: signal_layer must be < n_layers");
  }
  if (!(signal_to_noise >= 0.0)) {
    throw ValidationError("fixture: signal_to_noise must be >= 0");
  }
  if (words_per_item < 1) throw ValidationError("fixture: words_per_item must be >= 1");
}

std::vector<std::int32_t> fixture_labels(const FixtureSpec& spec) {
  spec.validate();
  const std::uint64_t count = spec.task_type == TaskType::sequence
                                  ? spec.n_items
                                  : spec.n_items * spec.words_per_item;
  std::vector<std::int32_t> labels(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    labels[i] = static_cast<std::int32_t>(i % static_cast<std::uint64_t>(spec.n_classes));
  }
  SplitMix64 rng(spec.label_seed);
  for (std::uint64_t i = count; i > 1; --i) {
    std::swap(labels[i - 1], labels[rng.below(i)]);
  }
  return labels;
}

std::uint64_t write_fixture(const FixtureSpec& spec, std::ostream& sink) {
  const auto labels = fixture_labels(spec);

  DumpHeader header;
  header.model_name = spec.model_name;
  header.task_type = spec.task_type;
  header.num_items = spec.n_items;
  header.num_layers = spec.n_layers;
  header.hidden_dim = spec.hidden_dim;
  for (int c = 0; c < spec.n_classes; ++c) {
    header.label_names.push_back("class_" + std::to_string(c));
  }
  DumpWriter writer(sink, header);

  // Token layout shared by every item.
  std::vector<std::int32_t> word_ids{-1};
  for (std::uint32_t w = 0; w < spec.words_per_item; ++w) {
    const int pieces = w % 2 == 0 ? 2 : 1;
    for (int p = 0; p < pieces; ++p) word_ids.push_back(static_cast<std::int32_t>(w));
  }

  SplitMix64 rng(spec.seed);
  HiddenStateRecord record;
  record.num_layers = spec.n_layers;
  record.hidden_dim = spec.hidden_dim;
  record.num_tokens = static_cast<std::uint32_t>(word_ids.size());
  record.num_words = spec.words_per_item;
  record.word_ids = word_ids;
  record.tensor.resize(static_cast<std::size_t>(spec.n_layers) * record.num_tokens *
                       spec.hidden_dim);

  for (std::uint64_t item = 0; item < spec.n_items; ++item) {
    if (spec.task_type == TaskType::sequence) {
      record.labels = {labels[item]};
    } else {
      const auto first = labels.begin() + static_cast<std::ptrdiff_t>(item * spec.words_per_item);
      record.labels.assign(first, first + spec.words_per_item);
    }
    std::size_t k = 0;
    for (std::uint32_t l = 0; l < spec.n_layers; ++l) {
      for (std::uint32_t t = 0; t < record.num_tokens; ++t) {
        int cls = -1;
        if (l == spec.signal_layer) {
          if (spec.task_type == TaskType::sequence) {
            cls = record.labels[0];
          } else if (word_ids[t] >= 0) {
            cls = record.labels[word_ids[t]];
          }
        }
        for (std::uint32_t j = 0; j < spec.hidden_dim; ++j) {
          double value = rng.normal();
          if (cls >= 0 && j == static_cast<std::uint32_t>(cls)) value += spec.signal_to_noise;
          record.tensor[k++] = static_cast<float>(value);
        }
      }
    }
    writer.write(record);
  }
  return writer.finish();
}

std::string make_dump(const FixtureSpec& spec) {
  std::ostringstream out(std::ios::binary);
  write_fixture(spec, out);
  return std::move(out).str();
}

}  // namespace transrank
