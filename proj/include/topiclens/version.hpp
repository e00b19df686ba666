#pragma once

#include <string_view>

namespace topiclens {

inline constexpr std::string_view kToolName = "topiclens";
inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace topiclens
