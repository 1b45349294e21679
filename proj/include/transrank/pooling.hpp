#pragma once

// Token -> word -> sentence pooling of per-layer hidden states.

#include "transrank/common.hpp"
#include "transrank/dump_format.hpp"
#include "transrank/error.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace transrank {

enum class WordPooling { first, mean };
enum class SentencePooling { first, mean, last };

std::string_view to_string(WordPooling p);
std::string_view to_string(SentencePooling p);
WordPooling parse_word_pooling(std::string_view s);
SentencePooling parse_sentence_pooling(std::string_view s);

/// Pools subword tokens into word vectors for one layer.
///
/// Row w is the mean (or the first) of the layer's token vectors whose
/// word id is w. Special tokens (word id -1) never contribute.
template <typename Scalar = double>
Matrix<Scalar> pool_words(const HiddenStateRecord& record, std::uint32_t layer,
                          WordPooling strategy) {
  if (layer >= record.num_layers) {
    throw ValidationError("layer " + std::to_string(layer) + " outside [0, " +
                          std::to_string(record.num_layers) + ")");
  }
  const auto tokens = record.layer(layer);
  Matrix<Scalar> words = Matrix<Scalar>::Zero(record.num_words, record.hidden_dim);
  std::vector<std::uint32_t> counts(record.num_words, 0);

  for (std::uint32_t t = 0; t < record.num_tokens; ++t) {
    const std::int32_t w = record.word_ids[t];
    if (w < 0) continue;
    if (strategy == WordPooling::first) {
      if (counts[w] == 0) words.row(w) = tokens.row(t).template cast<Scalar>();
    } else {
      words.row(w) += tokens.row(t).template cast<Scalar>();
    }
    ++counts[w];
  }
  for (std::uint32_t w = 0; w < record.num_words; ++w) {
    if (counts[w] == 0) {
      throw ValidationError("word " + std::to_string(w) + " has no tokens");
    }
    if (strategy == WordPooling::mean) words.row(w) /= static_cast<Scalar>(counts[w]);
  }
  return words;
}

/// Reduces word vectors of one sequence item to a single sentence vector.
///
/// `first` returns the stored token-0 vector, which must be a special token.
template <typename Derived>
Vector<typename Derived::Scalar> pool_sentence(
    const Eigen::MatrixBase<Derived>& words, const HiddenStateRecord& record,
    std::uint32_t layer, SentencePooling strategy) {
  using Scalar = typename Derived::Scalar;
  switch (strategy) {
    case SentencePooling::first:
      if (record.num_tokens == 0 || record.word_ids[0] != -1) {
        throw ConfigError(
            "sentence pooling 'first' needs a classification token at position 0; "
            "use 'mean' pooling for this model");
      }
      return record.layer(layer).row(0).transpose().template cast<Scalar>();
    case SentencePooling::last:
      if (words.rows() == 0) throw ValidationError("item has no words");
      return words.row(words.rows() - 1).transpose();
    case SentencePooling::mean:
      break;
  }
  if (words.rows() == 0) throw ValidationError("item has no words");
  Vector<Scalar> sum = Vector<Scalar>::Zero(words.cols());
  for (Index w = 0; w < words.rows(); ++w) sum += words.row(w).transpose();
  return sum / static_cast<Scalar>(words.rows());
}

}  // namespace transrank
