#pragma once

#include <string_view>

namespace requant {

inline constexpr std::string_view kToolName = "requant";
inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace requant
