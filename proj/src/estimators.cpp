#include "transrank/estimators.hpp"

#include "transrank/error.hpp"

#include <string>

namespace transrank {

void validate_inputs(const MatrixXd& X, const LabelVector& y) {
  if (X.rows() < 2) {
    throw ValidationError("need at least 2 samples, got " + std::to_string(X.rows()));
  }
  if (X.cols() < 1) throw ValidationError("feature dimension must be >= 1");
  if (!X.allFinite()) throw ValidationError("features contain NaN or infinity");
  if (y.size() != X.rows()) {
    throw ValidationError("label count " + std::to_string(y.size()) +
                          " does not match sample count " + std::to_string(X.rows()));
  }
  y.validate();
}

std::string_view to_string(EstimatorKind e) {
  switch (e) {
    case EstimatorKind::hscore: return "hscore";
    case EstimatorKind::logme: return "logme";
    case EstimatorKind::knn: return "knn";
  }
  return "?";
}

EstimatorKind parse_estimator(std::string_view s) {
  if (s == "hscore") return EstimatorKind::hscore;
  if (s == "logme") return EstimatorKind::logme;
  if (s == "knn") return EstimatorKind::knn;
  throw ConfigError("unknown estimator '" + std::string(s) + "'");
}

Estimate estimate(const MatrixXd& X, const LabelVector& y, const EstimatorConfig& cfg) {
  switch (cfg.kind) {
    case EstimatorKind::hscore: {
      auto r = hscore(X, y, cfg.hscore);
      return {r.score, r};
    }
    case EstimatorKind::logme: {
      auto r = logme_score(X, y, cfg.logme);
      return {r.score, std::move(r)};
    }
    case EstimatorKind::knn: {
      auto r = knn_score(X, y, cfg.knn);
      return {r.score, r};
    }
  }
  throw ConfigError("unknown estimator");
}

}  // namespace transrank
