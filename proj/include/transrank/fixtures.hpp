#pragma once

// Deterministic synthetic dumps: Gaussian class mixtures planted in one
// layer, pure noise everywhere else.

#include "transrank/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace transrank {

struct FixtureSpec {
  std::string model_name = "synthetic";
  TaskType task_type = TaskType::sequence;
  std::uint64_t n_items = 100;
  int n_classes = 2;
  std::uint32_t hidden_dim = 8;
  /// Stored layers, embedding output included.
  std::uint32_t n_layers = 4;
  std::uint32_t signal_layer = 1;
  double signal_to_noise = 1.0;
  /// Drives the features.
  std::uint64_t seed = 0;
  /// Drives the labels; dumps sharing it describe the same dataset.
  std::uint64_t label_seed = 0;
  std::uint32_t words_per_item = 2;

  void validate() const;
};

/// Labels in item order (sequence) or word order (token): a balanced
/// cyclic assignment shuffled by label_seed.
std::vector<std::int32_t> fixture_labels(const FixtureSpec& spec);

/// Streams a TRDF dump for `spec`; returns the byte count.
///
/// Item layout: a special token (word id -1) followed by words_per_item
/// words; even-numbered words span two subword tokens, odd ones a single
/// token. In the signal layer each token is signal_to_noise * e_c plus unit
/// Gaussian noise, with c the class of its item (sequence) or word (token);
/// every other value is unit Gaussian noise.
std::uint64_t write_fixture(const FixtureSpec& spec, std::ostream& sink);

/// write_fixture into memory.
std::string make_dump(const FixtureSpec& spec);

}  // namespace transrank
