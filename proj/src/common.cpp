#include "transrank/common.hpp"

#include "transrank/error.hpp"
#include "transrank/random.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace transrank {

int LabelVector::classes_present() const {
  std::vector<bool> seen(static_cast<std::size_t>(std::max(num_classes, 0)));
  int count = 0;
  for (Index i = 0; i < ids.size(); ++i) {
    const int c = ids[i];
    if (c >= 0 && c < num_classes && !seen[c]) {
      seen[c] = true;
      ++count;
    }
  }
  return count;
}

void LabelVector::validate() const {
  if (num_classes < 1) throw ValidationError("label vector has no classes");
  for (Index i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= num_classes) {
      throw ValidationError("label " + std::to_string(ids[i]) + " at row " +
                            std::to_string(i) + " outside [0, " +
                            std::to_string(num_classes) + ")");
    }
  }
  if (classes_present() < 2) {
    throw ValidationError("at least two distinct classes are required");
  }
}

std::string_view to_string(TaskType t) {
  return t == TaskType::token ? "token" : "sequence";
}

TaskType parse_task_type(std::string_view s) {
  if (s == "token") return TaskType::token;
  if (s == "sequence") return TaskType::sequence;
  throw ValidationError("unknown task type '" + std::string(s) + "'");
}

double SplitMix64::normal() {
  // 1 - uniform() lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace transrank
