#pragma once

#include <string_view>

namespace bsdelab {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace bsdelab
