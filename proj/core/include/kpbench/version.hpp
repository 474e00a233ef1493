#pragma once

#include <string_view>

namespace kpbench {

// Library version, "major.minor.patch".
std::string_view version() noexcept;

}  // namespace kpbench
