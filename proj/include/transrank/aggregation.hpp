#pragma once

#include "transrank/common.hpp"
#include "transrank/error.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace transrank {

enum class LayerStrategy { lastlayer, layermean, bestlayer };

std::string_view to_string(LayerStrategy s);
LayerStrategy parse_layer_strategy(std::string_view s);

/// Layer 0 (embedding output) is left out of layermean and bestlayer
/// unless include_embedding_layer is set. lastlayer always uses layer L-1.
struct LayerAggregation {
  LayerStrategy strategy = LayerStrategy::layermean;
  bool include_embedding_layer = false;

  /// Stored-layer indices that feed the views, ascending.
  std::vector<std::uint32_t> selected_layers(std::uint32_t num_layers) const;

  /// Stored-layer index each view corresponds to; empty for layermean.
  std::vector<std::uint32_t> view_layers(std::uint32_t num_layers) const;
};

/// Builds the feature views an estimator scores.
///
/// `layers` holds one matrix per stored layer, ordered 0..L-1. layermean sums
/// in ascending layer order before dividing, so it is deterministic.
template <typename Scalar>
std::vector<Matrix<Scalar>> build_views(std::span<const Matrix<Scalar>> layers,
                                        const LayerAggregation& aggregation) {
  if (layers.empty()) throw ValidationError("no layers to aggregate");
  for (const auto& m : layers) {
    if (m.rows() != layers.front().rows() || m.cols() != layers.front().cols()) {
      throw ValidationError("layer matrices differ in shape");
    }
  }
  const auto num_layers = static_cast<std::uint32_t>(layers.size());
  const auto selected = aggregation.selected_layers(num_layers);
  if (selected.empty()) {
    throw ValidationError("no layers selected for aggregation");
  }

  std::vector<Matrix<Scalar>> views;
  switch (aggregation.strategy) {
    case LayerStrategy::lastlayer:
      views.push_back(layers.back());
      break;
    case LayerStrategy::layermean: {
      Matrix<Scalar> sum = layers[selected.front()];
      for (std::size_t i = 1; i < selected.size(); ++i) sum += layers[selected[i]];
      views.push_back(sum / static_cast<Scalar>(selected.size()));
      break;
    }
    case LayerStrategy::bestlayer:
      views.reserve(selected.size());
      for (const auto l : selected) views.push_back(layers[l]);
      break;
  }
  return views;
}

template <typename Scalar>
std::vector<Matrix<Scalar>> build_views(const std::vector<Matrix<Scalar>>& layers,
                                        const LayerAggregation& aggregation) {
  return build_views(std::span<const Matrix<Scalar>>(layers), aggregation);
}

}  // namespace transrank
