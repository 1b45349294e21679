#include "transrank/estimators.hpp"

#include "transrank/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <vector>

namespace transrank {

// With t = alpha / beta, sigma_i the squared singular values and x_i the
// projections of y onto the left singular vectors:
//
//   ||m||^2       = sum sigma_i x_i^2 / (sigma_i + t)^2
//   ||y - X m||^2 = sum x_i^2 t^2 / (sigma_i + t)^2 + residual_sq
//   log|A|        = d log alpha + sum log1p(beta sigma_i / alpha)
//
// so the d/2 log alpha terms cancel and no d x d matrix is ever formed.
double EvidenceProblem::evidence(double alpha, double beta) const {
  const double t = alpha / beta;
  double log_det = 0.0;
  double m_sq = 0.0;
  double fit_sq = residual_sq;
  for (Index i = 0; i < sigma.size(); ++i) {
    const double s = sigma[i];
    const double denom = s + t;
    log_det += std::log1p(beta * s / alpha);
    m_sq += s * projection_sq[i] / (denom * denom);
    fit_sq += projection_sq[i] * (t / denom) * (t / denom);
  }
  const double log_evidence = 0.5 * n * std::log(beta) - 0.5 * log_det -
                              0.5 * beta * fit_sq - 0.5 * alpha * m_sq -
                              0.5 * n * std::log(2.0 * std::numbers::pi);
  return log_evidence / n;
}

LogmeState EvidenceProblem::maximize(const LogmeConfig& cfg) const {
  LogmeState state;
  double alpha = 1.0;
  double beta = 1.0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const double t = alpha / beta;
    double gamma = 0.0;
    double m_sq = 0.0;
    double fit_sq = residual_sq;
    for (Index i = 0; i < sigma.size(); ++i) {
      const double s = sigma[i];
      const double denom = s + t;
      gamma += s / denom;
      m_sq += s * projection_sq[i] / (denom * denom);
      fit_sq += projection_sq[i] * (t / denom) * (t / denom);
    }
    // The evidence keeps rising as alpha -> inf when the target carries no
    // linear signal; stop before the update overflows.
    if (!(m_sq > 0.0) || !(fit_sq > 0.0)) break;
    const double next_alpha = gamma / m_sq;
    const double next_beta = (n - gamma) / fit_sq;
    if (!std::isfinite(next_alpha) || !std::isfinite(next_beta) ||
        !(next_alpha > 0.0) || !(next_beta > 0.0)) {
      break;
    }
    const bool done = std::abs(next_alpha - alpha) / alpha < cfg.tolerance &&
                      std::abs(next_beta - beta) / beta < cfg.tolerance;
    alpha = next_alpha;
    beta = next_beta;
    state.iterations = it;
    state.evidence_trace.push_back(evidence(alpha, beta));
    if (done) {
      state.converged = true;
      break;
    }
  }
  state.alpha = alpha;
  state.beta = beta;
  state.evidence = evidence(alpha, beta);
  return state;
}

bool LogmeResult::converged() const {
  for (const auto& s : per_class) {
    if (!s.converged) return false;
  }
  return true;
}

LogmeResult logme_score(const MatrixXd& X, const LabelVector& y,
                        const LogmeConfig& cfg) {
  validate_inputs(X, y);
  const Index n = X.rows();

  Eigen::BDCSVD<MatrixXd> svd(X, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success) {
    throw ValidationError("logme: SVD of the feature matrix failed");
  }
  const VectorXd& singular = svd.singularValues();
  if (singular.size() == 0 || !(singular[0] > 0.0)) {
    throw ValidationError("logme: feature matrix has rank 0");
  }
  const MatrixXd& U = svd.matrixU();

  MatrixXd targets = MatrixXd::Zero(n, y.num_classes);
  for (Index i = 0; i < n; ++i) targets(i, y.ids[i]) = 1.0;
  const MatrixXd projections = U.transpose() * targets;
  const VectorXd residuals =
      (targets - U * projections).colwise().squaredNorm().transpose();

  EvidenceProblem problem;
  problem.sigma = singular.array().square();
  problem.n = static_cast<double>(n);

  LogmeResult result;
  result.per_class.reserve(y.num_classes);
  std::vector<char> present(y.num_classes, 0);
  for (Index i = 0; i < n; ++i) present[y.ids[i]] = 1;
  double total = 0.0;
  for (int c = 0; c < y.num_classes; ++c) {
    if (!present[c]) continue;
    problem.projection_sq = projections.col(c).array().square();
    problem.residual_sq = residuals[c];
    result.per_class.push_back(problem.maximize(cfg));
    result.per_class.back().class_id = c;
    total += result.per_class.back().evidence;
  }
  result.score = total / static_cast<double>(result.per_class.size());
  return result;
}

}  // namespace transrank
