#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mgrew::base64 {

std::string encode(const std::vector<std::uint8_t>& bytes);

/// Strict decoder: standard alphabet, mandatory padding. Throws mgrew::Error
/// on any malformed input.
std::vector<std::uint8_t> decode(std::string_view text);

}  // namespace mgrew::base64
