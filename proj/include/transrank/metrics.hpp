#pragma once

// Agreement between estimated transferability scores and gold fine-tuning
// scores.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace transrank {

/// Sample Pearson correlation. Throws ValidationError for length mismatch,
/// fewer than two values, or a constant input.
double pearson(std::span<const double> x, std::span<const double> y);

/// Weighted Kendall tau with additive hyperbolic weights.
///
/// Items are ranked by `gold` descending (rank r from 0, ties keep input
/// order) and weighted 1 / (r + 1). Each pair carries the sum of its two
/// weights; concordant pairs add it, discordant pairs subtract it, and pairs
/// tied in either input add nothing. The total is divided by the summed
/// weight of all pairs.
double weighted_kendall(std::span<const double> x, std::span<const double> gold);

struct CorrelationReport {
  double pearson_rho = 0.0;
  double weighted_kendall_tau = 0.0;
  std::size_t n_models = 0;
  /// Models present in only one of the inputs, sorted.
  std::vector<std::string> missing_models;
};

/// Correlates the models present in both maps; needs at least 2 of them.
CorrelationReport correlate(const std::map<std::string, double>& predicted,
                            const std::map<std::string, double>& gold);

}  // namespace transrank
