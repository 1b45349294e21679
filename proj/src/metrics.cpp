#include "transrank/metrics.hpp"

#include "transrank/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace transrank {
namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("score vectors differ in length (" + std::to_string(x.size()) +
                          " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw ValidationError("at least two scores are required");
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const double n = static_cast<double>(x.size());
  const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw ValidationError("correlation is undefined for a constant score vector");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double weighted_kendall(std::span<const double> x, std::span<const double> gold) {
  check_lengths(x, gold);
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gold[a] > gold[b]; });
  std::vector<double> weight(n);
  for (std::size_t r = 0; r < n; ++r) weight[order[r]] = 1.0 / static_cast<double>(r + 1);

  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = weight[i] + weight[j];
      numerator += sign(x[i] - x[j]) * sign(gold[i] - gold[j]) * w;
      denominator += w;
    }
  }
  return numerator / denominator;
}

CorrelationReport correlate(const std::map<std::string, double>& predicted,
                            const std::map<std::string, double>& gold) {
  CorrelationReport report;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [name, score] : predicted) {
    const auto it = gold.find(name);
    if (it == gold.end()) {
      report.missing_models.push_back(name);
      continue;
    }
    x.push_back(score);
    y.push_back(it->second);
  }
  for (const auto& [name, score] : gold) {
    if (!predicted.contains(name)) report.missing_models.push_back(name);
  }
  std::sort(report.missing_models.begin(), report.missing_models.end());
  if (x.size() < 2) {
    throw ValidationError("fewer than 2 models appear in both score files");
  }
  report.n_models = x.size();
  report.pearson_rho = pearson(x, y);
  report.weighted_kendall_tau = weighted_kendall(x, y);
  return report;
}

}  // namespace transrank
