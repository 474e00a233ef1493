#include "kpbench/error.hpp"

namespace kpbench {
namespace {

std::string join_issues(const std::string& context,
                        const std::vector<std::string>& issues) {
  std::string out = context;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "\n  ";
    out += issue;
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : ValidationError("validation failed:", std::move(issues)) {}

ValidationError::ValidationError(const std::string& context,
                                 std::vector<std::string> issues)
    : Error(join_issues(context, issues)), issues_(std::move(issues)) {}

}  // namespace kpbench
