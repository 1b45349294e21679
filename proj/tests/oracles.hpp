#pragma once

// Reference implementations used as test oracles. They favour directness
// over speed and share no code with the library beyond plain Eigen types.

#include "transrank/common.hpp"
#include "transrank/random.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

using transrank::Index;
using transrank::MatrixXd;
using transrank::VectorXd;

/// O(n^2 d) leave-one-out kNN accuracy with explicit pairwise differences.
inline double knn_loo(const MatrixXd& X, const std::vector<int>& labels, int num_classes,
                      std::size_t k) {
  const Index n = X.rows();
  std::size_t hits = 0;
  for (Index i = 0; i < n; ++i) {
    std::vector<std::pair<double, Index>> all;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double dist = 0.0;
      for (Index c = 0; c < X.cols(); ++c) {
        const double diff = X(i, c) - X(j, c);
        dist += diff * diff;
      }
      all.emplace_back(dist, j);
    }
    std::sort(all.begin(), all.end());
    std::vector<int> votes(num_classes, 0);
    std::vector<double> sums(num_classes, 0.0);
    for (std::size_t m = 0; m < k; ++m) {
      ++votes[labels[all[m].second]];
      sums[labels[all[m].second]] += all[m].first;
    }
    int best = 0;
    for (int c = 1; c < num_classes; ++c) {
      if (votes[c] > votes[best] || (votes[c] == votes[best] && sums[c] < sums[best])) {
        best = c;
      }
    }
    if (best == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

/// Log evidence per sample of Bayesian linear regression y ~ N(X m, 1/beta),
/// m ~ N(0, I/alpha), evaluated with the explicit d x d posterior precision.
struct DenseEvidence {
  MatrixXd gram;  // X^T X
  VectorXd xty;   // X^T y
  double yty = 0.0;
  double n = 0.0;

  DenseEvidence(const MatrixXd& X, const VectorXd& y)
      : gram(X.transpose() * X), xty(X.transpose() * y), yty(y.squaredNorm()),
        n(static_cast<double>(X.rows())) {}

  double operator()(double alpha, double beta) const {
    const Index d = gram.rows();
    MatrixXd A = beta * gram;
    A.diagonal().array() += alpha;
    const Eigen::LLT<MatrixXd> llt(A);
    const VectorXd m = beta * llt.solve(xty);
    const double fit = yty - 2.0 * m.dot(xty) + m.dot(gram * m);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double e = 0.5 * static_cast<double>(d) * std::log(alpha) +
                     0.5 * n * std::log(beta) - 0.5 * n * std::log(2.0 * std::numbers::pi) -
                     0.5 * beta * fit - 0.5 * alpha * m.squaredNorm() - 0.5 * log_det;
    return e / n;
  }
};

struct GridMax {
  double log_alpha = 0.0;
  double log_beta = 0.0;
  double evidence = -INFINITY;
};

/// Maximizes evidence over (log alpha, log beta) in [lo, hi]^2: a sweep at
/// `coarse` spacing, then a sweep at `fine` spacing within +-window of the
/// coarse winner.
template <typename F>
GridMax grid_maximize(const F& evidence, double lo = -8.0, double hi = 8.0,
                      double coarse = 0.25, double fine = 0.01, double window = 0.5) {
  auto sweep = [&](double a0, double a1, double b0, double b1, double step) {
    GridMax best;
    const int na = static_cast<int>(std::lround((a1 - a0) / step));
    const int nb = static_cast<int>(std::lround((b1 - b0) / step));
    for (int i = 0; i <= na; ++i) {
      const double la = a0 + i * step;
      for (int j = 0; j <= nb; ++j) {
        const double lb = b0 + j * step;
        const double e = evidence(std::exp(la), std::exp(lb));
        if (e > best.evidence) best = {la, lb, e};
      }
    }
    return best;
  };
  const GridMax rough = sweep(lo, hi, lo, hi, coarse);
  return sweep(std::max(lo, rough.log_alpha - window), std::min(hi, rough.log_alpha + window),
               std::max(lo, rough.log_beta - window), std::min(hi, rough.log_beta + window),
               fine);
}

/// Pearson correlation evaluated in long double.
inline long double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Weighted Kendall tau by explicit pair enumeration. The rank of item i is
/// the number of items with a strictly larger gold score plus the number of
/// earlier items with an equal one.
inline double weighted_kendall(const std::vector<double>& x, const std::vector<double>& gold) {
  const std::size_t n = x.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (gold[j] > gold[i] || (gold[j] == gold[i] && j < i)) ++r;
    }
    w[i] = 1.0 / static_cast<double>(r + 1);
  }
  auto sgn = [](double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); };
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      num += sgn(x[i] - x[j]) * sgn(gold[i] - gold[j]) * (w[i] + w[j]);
      den += w[i] + w[j];
    }
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// Random data helpers

inline MatrixXd gaussian(Index rows, Index cols, transrank::SplitMix64& rng) {
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

/// Orthogonal matrix from the QR factorization of a Gaussian matrix.
inline MatrixXd random_orthogonal(Index d, transrank::SplitMix64& rng) {
  const Eigen::HouseholderQR<MatrixXd> qr(gaussian(d, d, rng));
  return qr.householderQ() * MatrixXd::Identity(d, d);
}

/// Cyclic labels 0..C-1 shuffled, so every class is present when n >= C.
inline transrank::LabelVector shuffled_labels(Index n, int num_classes,
                                              transrank::SplitMix64& rng) {
  transrank::LabelVector y;
  y.num_classes = num_classes;
  y.ids.resize(n);
  for (Index i = 0; i < n; ++i) y.ids[i] = static_cast<int>(i % num_classes);
  for (Index i = n - 1; i > 0; --i) {
    std::swap(y.ids[i], y.ids[static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
  }
  return y;
}

/// Gaussian rows with class c shifted by scale * e_c (requires d >= C).
inline MatrixXd class_mixture(const transrank::LabelVector& y, Index d, double scale,
                              transrank::SplitMix64& rng) {
  MatrixXd X = gaussian(y.size(), d, rng);
  for (Index i = 0; i < y.size(); ++i) X(i, y.ids[i]) += scale;
  return X;
}

inline std::vector<int> to_vector(const transrank::LabelVector& y) {
  return {y.ids.data(), y.ids.data() + y.ids.size()};
}

}  // namespace oracle
