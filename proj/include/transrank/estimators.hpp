#pragma once

// Transferability estimators: leave-one-out kNN accuracy, LogME, and
// (shrinkage) H-score. All arithmetic is carried out in double precision;
// the templated overloads accept any dense Eigen expression and promote it.

#include "transrank/common.hpp"

#include <cstddef>
#include <string_view>
#include <variant>
#include <vector>

namespace transrank {

/// Throws ValidationError unless X has n >= 2 finite rows, d >= 1 and y is
/// a valid label vector of length n.
void validate_inputs(const MatrixXd& X, const LabelVector& y);

// ---------------------------------------------------------------------------
// kNN

struct KnnConfig {
  std::size_t k = 3;
  /// Rows per distance block. Does not change the result.
  std::size_t batch_size = 1024;
  /// Workers for distance blocks; 0 means default_thread_count().
  std::size_t threads = 1;
};

struct KnnResult {
  double score = 0.0;
  std::size_t k = 0;
  std::size_t n = 0;
};

/// Leave-one-out kNN accuracy under squared Euclidean distance.
///
/// Neighbours are ordered by (distance, row index). The vote goes to the
/// class with most neighbours; ties go to the smaller summed distance and
/// then to the smaller class id.
KnnResult knn_score(const MatrixXd& X, const LabelVector& y,
                    const KnnConfig& cfg = {});

template <typename Derived>
KnnResult knn_score(const Eigen::MatrixBase<Derived>& X, const LabelVector& y,
                    const KnnConfig& cfg = {}) {
  return knn_score(MatrixXd(X.template cast<double>()), y, cfg);
}

// ---------------------------------------------------------------------------
// LogME

struct LogmeConfig {
  double tolerance = 1e-5;
  int max_iterations = 100;
};

/// Per-class outcome of the evidence maximization.
struct LogmeState {
  int class_id = 0;
  double alpha = 1.0;     // prior precision
  double beta = 1.0;      // noise precision
  double evidence = 0.0;  // log evidence per sample at (alpha, beta)
  int iterations = 0;
  bool converged = false;
  /// Evidence per sample after each fixed-point update.
  std::vector<double> evidence_trace;
};

struct LogmeResult {
  double score = 0.0;
  std::vector<LogmeState> per_class;

  bool converged() const;
};

/// Spectrum of one (features, target) pair: everything the evidence of the
/// Bayesian linear model depends on.
struct EvidenceProblem {
  VectorXd sigma;           // squared singular values of X (min(n, d) of them)
  VectorXd projection_sq;   // (U^T y)^2, aligned with sigma
  double residual_sq = 0;   // ||y - U U^T y||^2
  double n = 0;

  /// Log marginal likelihood divided by n.
  double evidence(double alpha, double beta) const;
  /// Fixed-point maximization starting from alpha = beta = 1.
  LogmeState maximize(const LogmeConfig& cfg) const;
};

/// Mean over the classes present in y of the maximized one-vs-rest log
/// evidence per sample.
LogmeResult logme_score(const MatrixXd& X, const LabelVector& y,
                        const LogmeConfig& cfg = {});

template <typename Derived>
LogmeResult logme_score(const Eigen::MatrixBase<Derived>& X, const LabelVector& y,
                        const LogmeConfig& cfg = {}) {
  return logme_score(MatrixXd(X.template cast<double>()), y, cfg);
}

// ---------------------------------------------------------------------------
// H-score

enum class Shrinkage { none, ledoit_wolf };

std::string_view to_string(Shrinkage s);
Shrinkage parse_shrinkage(std::string_view s);

struct HscoreConfig {
  Shrinkage shrinkage = Shrinkage::ledoit_wolf;
};

struct HscoreResult {
  double score = 0.0;
  double shrinkage_intensity = 0.0;
  /// Feature covariance vanished; the score is 0 by convention.
  bool degenerate = false;
};

/// trace(pinv(shrunk feature covariance) * covariance of class means).
HscoreResult hscore(const MatrixXd& X, const LabelVector& y,
                    const HscoreConfig& cfg = {});

template <typename Derived>
HscoreResult hscore(const Eigen::MatrixBase<Derived>& X, const LabelVector& y,
                    const HscoreConfig& cfg = {}) {
  return hscore(MatrixXd(X.template cast<double>()), y, cfg);
}

/// Ledoit-Wolf intensity toward the scaled identity, for column-centered
/// data, clamped to [0, 1].
double ledoit_wolf_intensity(const MatrixXd& centered);

/// Moore-Penrose inverse of a symmetric matrix. Eigenvalues with magnitude
/// at most rtol * max |eigenvalue| are treated as zero.
MatrixXd symmetric_pinv(const MatrixXd& S, double rtol);

// ---------------------------------------------------------------------------
// Dispatch

enum class EstimatorKind { hscore, logme, knn };

std::string_view to_string(EstimatorKind e);
EstimatorKind parse_estimator(std::string_view s);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::hscore;
  KnnConfig knn;
  LogmeConfig logme;
  HscoreConfig hscore;
};

struct Estimate {
  double score = 0.0;
  std::variant<HscoreResult, LogmeResult, KnnResult> details;
};

Estimate estimate(const MatrixXd& X, const LabelVector& y,
                  const EstimatorConfig& cfg);

}  // namespace transrank
