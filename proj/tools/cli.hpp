#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rabi::cli {

inline constexpr const char* tool_version = "0.1.0";

// Exit codes: 0 success, 1 user error, 2 computational failure.
int run(const std::vector<std::string>& args);

// 64-bit FNV-1a, used for the manifest digests.
std::uint64_t fnv1a(std::string_view bytes);

} // namespace rabi::cli
