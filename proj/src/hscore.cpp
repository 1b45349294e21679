#include "transrank/estimators.hpp"

#include "transrank/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace transrank {
namespace {

// Column-centers X. Constant columns become exact zeros, so identical rows
// give an exactly vanishing covariance.
MatrixXd center_columns(const MatrixXd& X) {
  MatrixXd centered(X.rows(), X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    const auto col = X.col(j);
    if (col.minCoeff() == col.maxCoeff()) {
      centered.col(j).setZero();
    } else {
      centered.col(j) = col.array() - col.mean();
    }
  }
  return centered;
}

// Biased (divisor n) covariance of column-centered data.
MatrixXd covariance(const MatrixXd& centered) {
  const Index d = centered.cols();
  MatrixXd cov = MatrixXd::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(
      centered.transpose(), 1.0 / static_cast<double>(centered.rows()));
  return cov.selfadjointView<Eigen::Lower>();
}

double lw_intensity(const MatrixXd& centered, const MatrixXd& cov) {
  const double n = static_cast<double>(centered.rows());
  const double d = static_cast<double>(centered.cols());
  const double trace = cov.trace();
  const double mu = trace / d;
  // sum_ij (X^2' X^2)_ij == sum over rows of ||x||^4.
  const double fourth = centered.rowwise().squaredNorm().array().square().sum();
  const double cov_frob = cov.squaredNorm();

  const double beta_raw = (fourth / n - cov_frob) / (d * n);
  const double delta = (cov_frob - 2.0 * mu * trace + d * mu * mu) / d;
  const double beta = std::min(beta_raw, delta);
  if (!(delta > 0.0) || beta == 0.0) return 0.0;
  return std::clamp(beta / delta, 0.0, 1.0);
}

}  // namespace

std::string_view to_string(Shrinkage s) {
  return s == Shrinkage::none ? "none" : "ledoit_wolf";
}

Shrinkage parse_shrinkage(std::string_view s) {
  if (s == "none") return Shrinkage::none;
  if (s == "ledoit_wolf") return Shrinkage::ledoit_wolf;
  throw ConfigError("unknown shrinkage '" + std::string(s) + "'");
}

double ledoit_wolf_intensity(const MatrixXd& centered) {
  return lw_intensity(centered, covariance(centered));
}

MatrixXd symmetric_pinv(const MatrixXd& S, double rtol) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(S);
  if (eig.info() != Eigen::Success) {
    throw ValidationError("eigendecomposition of covariance failed");
  }
  const VectorXd& values = eig.eigenvalues();
  const double largest = values.cwiseAbs().maxCoeff();
  const double cutoff = rtol * largest;
  VectorXd inverted(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    inverted[i] = std::abs(values[i]) > cutoff ? 1.0 / values[i] : 0.0;
  }
  const MatrixXd& V = eig.eigenvectors();
  return V * inverted.asDiagonal() * V.transpose();
}

HscoreResult hscore(const MatrixXd& X, const LabelVector& y, const HscoreConfig& cfg) {
  validate_inputs(X, y);
  const Index n = X.rows();
  const Index d = X.cols();
  const MatrixXd centered = center_columns(X);

  const MatrixXd cov_f = covariance(centered);

  // Class means, each weighted by its class size.
  MatrixXd class_sums = MatrixXd::Zero(y.num_classes, d);
  VectorXd class_counts = VectorXd::Zero(y.num_classes);
  for (Index i = 0; i < n; ++i) {
    class_sums.row(y.ids[i]) += centered.row(i);
    class_counts[y.ids[i]] += 1.0;
  }
  const RowVector<double> g_mean = class_sums.colwise().sum() / static_cast<double>(n);
  MatrixXd weighted(y.num_classes, d);
  for (int c = 0; c < y.num_classes; ++c) {
    if (class_counts[c] == 0.0) {
      weighted.row(c).setZero();
      continue;
    }
    const RowVector<double> mean = class_sums.row(c) / class_counts[c];
    weighted.row(c) = std::sqrt(class_counts[c]) * (mean - g_mean);
  }
  const MatrixXd cov_g = weighted.transpose() * weighted / static_cast<double>(n);

  if (!cov_f.allFinite() || !cov_g.allFinite()) {
    throw ValidationError("hscore: covariance contains non-finite values");
  }

  HscoreResult result;
  if (cov_f.cwiseAbs().maxCoeff() == 0.0) {
    result.degenerate = true;
    return result;
  }

  MatrixXd shrunk = cov_f;
  if (cfg.shrinkage == Shrinkage::ledoit_wolf) {
    const double rho = lw_intensity(centered, cov_f);
    const double target = cov_f.trace() / static_cast<double>(d);
    shrunk *= (1.0 - rho);
    shrunk.diagonal().array() += rho * target;
    result.shrinkage_intensity = rho;
  }

  const double rtol = static_cast<double>(d) * std::numeric_limits<double>::epsilon();
  const MatrixXd pinv = symmetric_pinv(shrunk, rtol);
  result.score = (pinv.cwiseProduct(cov_g)).sum();  // trace(pinv * cov_g), both symmetric
  return result;
}

}  // namespace transrank
