#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>

namespace transrank {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

/// n x d pooled features for one (model, layer view). Rows are items.
template <typename Scalar = double>
using EmbeddingMatrix = Matrix<Scalar>;

/// Class ids aligned with the rows of an EmbeddingMatrix.
struct LabelVector {
  VectorXi ids;
  int num_classes = 0;

  Index size() const { return ids.size(); }
  /// Number of classes with at least one member.
  int classes_present() const;
  /// Throws ValidationError unless ids lie in [0, num_classes) and at
  /// least two classes are present.
  void validate() const;
};

enum class TaskType { token, sequence };

std::string_view to_string(TaskType t);
TaskType parse_task_type(std::string_view s);

}  // namespace transrank
