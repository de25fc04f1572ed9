#pragma once

#include <string_view>

namespace batchrisk {

inline constexpr std::string_view kLibraryName = "batchrisk";
inline constexpr std::string_view kLibraryVersion = "0.1.0";

} // namespace batchrisk
