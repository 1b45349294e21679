#include "transrank/estimators.hpp"

#include "transrank/error.hpp"
#include "transrank/parallel.hpp"

#include <algorithm>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace transrank {
namespace {

using Neighbor = std::pair<double, Index>;  // (squared distance, row)

int vote(std::span<const Neighbor> neighbors, const LabelVector& y,
         std::vector<int>& counts, std::vector<double>& dist_sums) {
  std::fill(counts.begin(), counts.end(), 0);
  std::fill(dist_sums.begin(), dist_sums.end(), 0.0);
  for (const auto& [dist, row] : neighbors) {
    const int c = y.ids[row];
    ++counts[c];
    dist_sums[c] += dist;
  }
  int best = -1;
  for (int c = 0; c < y.num_classes; ++c) {
    if (counts[c] == 0) continue;
    if (best < 0 || counts[c] > counts[best] ||
        (counts[c] == counts[best] && dist_sums[c] < dist_sums[best])) {
      best = c;
    }
  }
  return best;
}

}  // namespace

KnnResult knn_score(const MatrixXd& X, const LabelVector& y, const KnnConfig& cfg) {
  validate_inputs(X, y);
  const Index n = X.rows();
  const Index d = X.cols();
  if (cfg.k == 0 || cfg.k >= static_cast<std::size_t>(n)) {
    throw ConfigError("knn: k must lie in [1, n), got k=" + std::to_string(cfg.k) +
                      " with n=" + std::to_string(n));
  }
  if (cfg.batch_size == 0) throw ConfigError("knn: batch_size must be positive");

  const auto k = static_cast<Index>(cfg.k);
  const auto batch = static_cast<Index>(cfg.batch_size);
  const VectorXd sq_norms = X.rowwise().squaredNorm();
  // Gram-based distances carry rounding noise of order d * eps * |x|^2;
  // anything below that is an exact duplicate and snaps to zero.
  const double snap = 4.0 * static_cast<double>(d) *
                      std::numeric_limits<double>::epsilon();

  const Index num_blocks = (n + batch - 1) / batch;
  std::vector<char> correct(static_cast<std::size_t>(n), 0);
  const std::size_t threads =
      cfg.threads == 0 ? default_thread_count() : cfg.threads;

  parallel_for(static_cast<std::size_t>(num_blocks), threads, [&](std::size_t b) {
    const Index begin = static_cast<Index>(b) * batch;
    const Index rows = std::min(batch, n - begin);
    const MatrixXd gram = X.middleRows(begin, rows) * X.transpose();

    std::vector<Neighbor> candidates(static_cast<std::size_t>(n - 1));
    std::vector<int> counts(y.num_classes);
    std::vector<double> dist_sums(y.num_classes);

    for (Index r = 0; r < rows; ++r) {
      const Index i = begin + r;
      std::size_t m = 0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double scale = sq_norms[i] + sq_norms[j];
        double dist = scale - 2.0 * gram(r, j);
        if (dist <= snap * scale) dist = 0.0;
        candidates[m++] = {dist, j};
      }
      std::nth_element(candidates.begin(), candidates.begin() + (k - 1),
                       candidates.end());
      std::sort(candidates.begin(), candidates.begin() + k);
      const int predicted =
          vote(std::span<const Neighbor>(candidates.data(), k), y, counts, dist_sums);
      correct[static_cast<std::size_t>(i)] = predicted == y.ids[i];
    }
  });

  std::size_t hits = 0;
  for (const char c : correct) hits += c;
  return {static_cast<double>(hits) / static_cast<double>(n), cfg.k,
          static_cast<std::size_t>(n)};
}

}  // namespace transrank
