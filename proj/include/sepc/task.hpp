#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sepc {

enum class TaskKind { kClassification, kRegression };

inline std::string_view to_string(TaskKind k) {
  return k == TaskKind::kClassification ? "classification" : "regression";
}

inline TaskKind parse_task_kind(std::string_view s) {
  if (s == "classification") return TaskKind::kClassification;
  if (s == "regression") return TaskKind::kRegression;
  throw std::invalid_argument("unknown task kind '" + std::string(s) + "'");
}

}  // namespace sepc
