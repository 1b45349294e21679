#include "oracles.hpp"

#include "transrank/error.hpp"
#include "transrank/pooling.hpp"

#include <doctest.h>

#include <algorithm>

using namespace transrank;

namespace {

// One layer, dim 2: [CLS] w0 w0 w1
HiddenStateRecord cls_record() {
  HiddenStateRecord r;
  r.num_layers = 1;
  r.hidden_dim = 2;
  r.num_tokens = 4;
  r.num_words = 2;
  r.word_ids = {-1, 0, 0, 1};
  r.labels = {0};
  r.tensor = {9, 9, 1, 2, 3, 4, 5, 6};
  return r;
}

}  // namespace

TEST_SUITE("pooling") {

TEST_CASE("mean averages subwords, first takes the first one") {
  const HiddenStateRecord r = cls_record();
  const MatrixXd mean = pool_words(r, 0, WordPooling::mean);
  const MatrixXd first = pool_words(r, 0, WordPooling::first);
  CHECK(mean.row(0) == Eigen::RowVector2d(2, 3));
  CHECK(first.row(0) == Eigen::RowVector2d(1, 2));
  CHECK(mean.row(1) == Eigen::RowVector2d(5, 6));
  CHECK(first.row(1) == Eigen::RowVector2d(5, 6));
}

TEST_CASE("special tokens never contribute") {
  HiddenStateRecord r = cls_record();
  r.tensor[0] = 1e6f;
  r.tensor[1] = -1e6f;
  const MatrixXd mean = pool_words(r, 0, WordPooling::mean);
  CHECK(mean.row(0) == Eigen::RowVector2d(2, 3));
}

TEST_CASE("single-subword words pass through for both strategies") {
  HiddenStateRecord r;
  r.num_layers = 1;
  r.hidden_dim = 3;
  r.num_tokens = 3;
  r.num_words = 3;
  r.word_ids = {0, 1, 2};
  r.labels = {0};
  r.tensor = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto tokens = r.layer(0).cast<double>();
  CHECK(pool_words(r, 0, WordPooling::mean) == tokens);
  CHECK(pool_words(r, 0, WordPooling::first) == tokens);
}

TEST_CASE("pooling in float keeps the stored values") {
  const HiddenStateRecord r = cls_record();
  const Matrix<float> f = pool_words<float>(r, 0, WordPooling::first);
  CHECK(f(1, 1) == 6.0f);
}

TEST_CASE("layer index is checked") {
  CHECK_THROWS_AS(pool_words(cls_record(), 1, WordPooling::mean), ValidationError);
}

TEST_CASE("sentence pooling strategies") {
  HiddenStateRecord r = cls_record();
  MatrixXd words(2, 2);
  words << 0, 0, 2, 2;
  CHECK(pool_sentence(words, r, 0, SentencePooling::mean) == Eigen::Vector2d(1, 1));
  CHECK(pool_sentence(words, r, 0, SentencePooling::last) == Eigen::Vector2d(2, 2));
  CHECK(pool_sentence(words, r, 0, SentencePooling::first) == Eigen::Vector2d(9, 9));
}

TEST_CASE("sentence mean averages words, not tokens") {
  const HiddenStateRecord r = cls_record();
  const MatrixXd words = pool_words(r, 0, WordPooling::mean);
  // Word mean: ([2,3] + [5,6]) / 2; a token mean would give [3,4].
  CHECK(pool_sentence(words, r, 0, SentencePooling::mean) == Eigen::Vector2d(3.5, 4.5));
}

TEST_CASE("first pooling without a classification token is a configuration error") {
  HiddenStateRecord r = cls_record();
  r.word_ids = {0, 0, 1, 1};
  const MatrixXd words = pool_words(r, 0, WordPooling::mean);
  try {
    pool_sentence(words, r, 0, SentencePooling::first);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("mean") != std::string::npos);
  }
}

TEST_CASE("permuting tokens within a word leaves mean pooling unchanged") {
  SplitMix64 rng(2);
  HiddenStateRecord r;
  r.num_layers = 1;
  r.hidden_dim = 4;
  r.num_words = 3;
  r.word_ids = {-1, 0, 0, 0, 1, 2, 2};
  r.num_tokens = 7;
  r.labels = {0};
  for (int i = 0; i < 28; ++i) r.tensor.push_back(static_cast<float>(rng.normal()));
  HiddenStateRecord swapped = r;
  // Reverse the three tokens of word 0.
  for (int d = 0; d < 4; ++d) std::swap(swapped.tensor[4 + d], swapped.tensor[12 + d]);
  const MatrixXd a = pool_words(r, 0, WordPooling::mean);
  const MatrixXd b = pool_words(swapped, 0, WordPooling::mean);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("mean pooling is linear") {
  SplitMix64 rng(4);
  HiddenStateRecord a = cls_record();
  HiddenStateRecord b = cls_record();
  HiddenStateRecord sum = cls_record();
  for (std::size_t i = 0; i < a.tensor.size(); ++i) {
    // Small integers keep every sum exact in float.
    a.tensor[i] = static_cast<float>(rng.below(16));
    b.tensor[i] = static_cast<float>(rng.below(16));
    sum.tensor[i] = a.tensor[i] + b.tensor[i];
  }
  const MatrixXd lhs = pool_words(sum, 0, WordPooling::mean);
  const MatrixXd rhs = pool_words(a, 0, WordPooling::mean) + pool_words(b, 0, WordPooling::mean);
  CHECK(lhs == rhs);
  CHECK(pool_sentence(lhs, sum, 0, SentencePooling::mean) ==
        pool_sentence(pool_words(a, 0, WordPooling::mean), a, 0, SentencePooling::mean) +
            pool_sentence(pool_words(b, 0, WordPooling::mean), b, 0, SentencePooling::mean));
}

TEST_CASE("strategy names parse and print") {
  CHECK(parse_word_pooling("first") == WordPooling::first);
  CHECK(to_string(SentencePooling::last) == "last");
  CHECK_THROWS_AS(parse_sentence_pooling("max"), ConfigError);
}

}  // TEST_SUITE
