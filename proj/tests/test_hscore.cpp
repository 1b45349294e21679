#include "oracles.hpp"

#include "transrank/error.hpp"
#include "transrank/estimators.hpp"

#include <doctest.h>

#include <limits>

using namespace transrank;

namespace {

// Direct transcription: trace(pinv(S_f) S_g) with S_g built from a matrix
// whose rows are replaced by their class means.
double hscore_reference(const MatrixXd& X, const LabelVector& y) {
  const Index n = X.rows();
  const MatrixXd Xc = X.rowwise() - X.colwise().mean();
  MatrixXd G(n, X.cols());
  for (Index i = 0; i < n; ++i) {
    RowVector<double> mean = RowVector<double>::Zero(X.cols());
    int count = 0;
    for (Index j = 0; j < n; ++j) {
      if (y.ids[j] == y.ids[i]) {
        mean += Xc.row(j);
        ++count;
      }
    }
    G.row(i) = mean / count;
  }
  const MatrixXd Gc = G.rowwise() - G.colwise().mean();
  const MatrixXd Sf = Xc.transpose() * Xc / static_cast<double>(n);
  const MatrixXd Sg = Gc.transpose() * Gc / static_cast<double>(n);
  const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(Sf);
  return (cod.pseudoInverse() * Sg).trace();
}

// Ledoit-Wolf intensity written out over explicit sums.
double lw_reference(const MatrixXd& Xc) {
  const double n = static_cast<double>(Xc.rows());
  const double d = static_cast<double>(Xc.cols());
  const MatrixXd S = Xc.transpose() * Xc / n;
  const double mu = S.trace() / d;
  double delta = 0.0;
  for (Index i = 0; i < S.rows(); ++i) {
    for (Index j = 0; j < S.cols(); ++j) {
      const double target = i == j ? mu : 0.0;
      delta += (S(i, j) - target) * (S(i, j) - target);
    }
  }
  delta /= d;
  double beta = 0.0;
  for (Index k = 0; k < Xc.rows(); ++k) {
    const MatrixXd outer = Xc.row(k).transpose() * Xc.row(k);
    beta += (outer - S).squaredNorm();
  }
  beta /= n * n * d;
  return std::min(beta, delta) / delta;
}

}  // namespace

TEST_SUITE("hscore") {

TEST_CASE("identical rows score exactly zero") {
  LabelVector y;
  y.num_classes = 2;
  y.ids.resize(6);
  y.ids << 0, 1, 0, 1, 1, 0;
  const MatrixXd X = MatrixXd::Constant(6, 4, 0.1);
  for (const auto s : {Shrinkage::none, Shrinkage::ledoit_wolf}) {
    const HscoreResult r = hscore(X, y, {s});
    CHECK(r.score == 0.0);
    CHECK(r.degenerate);
  }
}

TEST_CASE("two tight 1-D clusters approach a score of one") {
  SplitMix64 rng(1);
  const LabelVector y = oracle::shuffled_labels(200, 2, rng);
  MatrixXd X(200, 1);
  for (Index i = 0; i < 200; ++i) X(i, 0) = y.ids[i] + 1e-4 * rng.normal();
  CHECK(std::abs(hscore(X, y, {Shrinkage::none}).score - 1.0) <= 1e-2);
}

TEST_CASE("matches the direct construction without shrinkage") {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int C = 2 + static_cast<int>(rng.below(4));
    const Index d = C + static_cast<Index>(rng.below(6));
    const LabelVector y = oracle::shuffled_labels(60 + static_cast<Index>(rng.below(100)), C, rng);
    const MatrixXd X = oracle::class_mixture(y, d, 1.0, rng);
    CHECK(hscore(X, y, {Shrinkage::none}).score ==
          doctest::Approx(hscore_reference(X, y)).epsilon(1e-9));
  }
}

TEST_CASE("Ledoit-Wolf intensity matches explicit sums") {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 10 + static_cast<Index>(rng.below(50));
    const Index d = 1 + static_cast<Index>(rng.below(20));
    const MatrixXd X = oracle::gaussian(n, d, rng);
    const MatrixXd Xc = X.rowwise() - X.colwise().mean();
    const double rho = ledoit_wolf_intensity(Xc);
    CHECK(rho >= 0.0);
    CHECK(rho <= 1.0);
    CHECK(rho == doctest::Approx(std::clamp(lw_reference(Xc), 0.0, 1.0)).epsilon(1e-10));
  }
}

TEST_CASE("shrinkage is reported and regularizes high dimensions") {
  SplitMix64 rng(4);
  const LabelVector y = oracle::shuffled_labels(20, 2, rng);
  const MatrixXd X = oracle::class_mixture(y, 40, 1.0, rng);  // d > n
  const HscoreResult shrunk = hscore(X, y);
  CHECK(shrunk.shrinkage_intensity > 0.0);
  CHECK(shrunk.shrinkage_intensity <= 1.0);
  CHECK(std::isfinite(shrunk.score));
  CHECK(hscore(X, y, {Shrinkage::none}).shrinkage_intensity == 0.0);
}

TEST_CASE("translation leaves the score unchanged") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const LabelVector y = oracle::shuffled_labels(100, 3, rng);
    const MatrixXd X = oracle::class_mixture(y, 8, 1.0, rng);
    const MatrixXd moved = X.rowwise() + (5.0 * oracle::gaussian(1, 8, rng)).row(0);
    for (const auto s : {Shrinkage::none, Shrinkage::ledoit_wolf}) {
      const double a = hscore(X, y, {s}).score;
      CHECK(hscore(moved, y, {s}).score == doctest::Approx(a).epsilon(1e-10));
    }
  }
}

TEST_CASE("invertible linear maps leave the unshrunk score unchanged") {
  SplitMix64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const LabelVector y = oracle::shuffled_labels(300, 4, rng);
    const MatrixXd X = oracle::class_mixture(y, 8, 1.0, rng);
    const MatrixXd A = MatrixXd::Identity(8, 8) + 0.3 * oracle::gaussian(8, 8, rng);
    const double a = hscore(X, y, {Shrinkage::none}).score;
    const double b = hscore(X * A, y, {Shrinkage::none}).score;
    CHECK(std::abs(a - b) <= 1e-6 * std::abs(a));
  }
}

TEST_CASE("shuffled labels score below true labels") {
  SplitMix64 rng(7);
  int wins = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const LabelVector y = oracle::shuffled_labels(500, 2, rng);
    const MatrixXd X = oracle::class_mixture(y, 16, 1.0, rng);
    const LabelVector shuffled = oracle::shuffled_labels(500, 2, rng);
    wins += hscore(X, shuffled).score < hscore(X, y).score;
  }
  CHECK(wins >= 95);
}

TEST_CASE("pseudo-inverse drops tiny eigenvalues") {
  MatrixXd S = MatrixXd::Zero(3, 3);
  S(0, 0) = 4.0;
  S(1, 1) = 1e-20;
  const MatrixXd P = symmetric_pinv(S, 3 * std::numeric_limits<double>::epsilon());
  CHECK(P(0, 0) == doctest::Approx(0.25));
  CHECK(P(1, 1) == 0.0);
  CHECK(P(2, 2) == 0.0);
}

TEST_CASE("constant columns do not break the score") {
  SplitMix64 rng(8);
  const LabelVector y = oracle::shuffled_labels(50, 2, rng);
  MatrixXd X = oracle::class_mixture(y, 3, 2.0, rng);
  X.col(2).setConstant(3.3);
  const double with_constant = hscore(X, y, {Shrinkage::none}).score;
  CHECK(with_constant ==
        doctest::Approx(hscore(MatrixXd(X.leftCols(2)), y, {Shrinkage::none}).score)
            .epsilon(1e-9));
}

TEST_CASE("dispatch through estimate") {
  SplitMix64 rng(9);
  const LabelVector y = oracle::shuffled_labels(40, 2, rng);
  const MatrixXd X = oracle::class_mixture(y, 3, 2.0, rng);
  EstimatorConfig cfg;
  const Estimate e = estimate(X, y, cfg);
  CHECK(e.score == hscore(X, y).score);
  CHECK(std::holds_alternative<HscoreResult>(e.details));
  cfg.kind = EstimatorKind::knn;
  CHECK(std::get<KnnResult>(estimate(X, y, cfg).details).k == 3);
  cfg.kind = EstimatorKind::logme;
  CHECK(estimate(X, y, cfg).score == logme_score(X, y).score);
  CHECK(parse_estimator("logme") == EstimatorKind::logme);
  CHECK_THROWS_AS(parse_estimator("gbc"), ConfigError);
}

}  // TEST_SUITE
