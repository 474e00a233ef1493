#include "kpbench/version.hpp"

namespace kpbench {

std::string_view version() noexcept { return KPBENCH_VERSION; }

}  // namespace kpbench
