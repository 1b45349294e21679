#include "transrank/aggregation.hpp"

#include <string>

namespace transrank {

std::string_view to_string(LayerStrategy s) {
  switch (s) {
    case LayerStrategy::lastlayer: return "lastlayer";
    case LayerStrategy::layermean: return "layermean";
    case LayerStrategy::bestlayer: return "bestlayer";
  }
  return "?";
}

LayerStrategy parse_layer_strategy(std::string_view s) {
  if (s == "lastlayer") return LayerStrategy::lastlayer;
  if (s == "layermean") return LayerStrategy::layermean;
  if (s == "bestlayer") return LayerStrategy::bestlayer;
  throw ConfigError("unknown layer aggregation '" + std::string(s) + "'");
}

std::vector<std::uint32_t> LayerAggregation::selected_layers(
    std::uint32_t num_layers) const {
  if (num_layers == 0) return {};
  if (strategy == LayerStrategy::lastlayer) return {num_layers - 1};
  std::vector<std::uint32_t> out;
  for (std::uint32_t l = include_embedding_layer ? 0 : 1; l < num_layers; ++l) {
    out.push_back(l);
  }
  return out;
}

std::vector<std::uint32_t> LayerAggregation::view_layers(
    std::uint32_t num_layers) const {
  if (strategy == LayerStrategy::layermean) return {};
  return selected_layers(num_layers);
}

}  // namespace transrank
