#include "transrank/pooling.hpp"

namespace transrank {

std::string_view to_string(WordPooling p) {
  return p == WordPooling::first ? "first" : "mean";
}

std::string_view to_string(SentencePooling p) {
  switch (p) {
    case SentencePooling::first: return "first";
    case SentencePooling::mean: return "mean";
    case SentencePooling::last: return "last";
  }
  return "?";
}

WordPooling parse_word_pooling(std::string_view s) {
  if (s == "first") return WordPooling::first;
  if (s == "mean") return WordPooling::mean;
  throw ConfigError("unknown word pooling '" + std::string(s) + "'");
}

SentencePooling parse_sentence_pooling(std::string_view s) {
  if (s == "first") return SentencePooling::first;
  if (s == "mean") return SentencePooling::mean;
  if (s == "last") return SentencePooling::last;
  throw ConfigError("unknown sentence pooling '" + std::string(s) + "'");
}

}  // namespace transrank
