#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace hypervae::app {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::string_view bytes);
std::string to_hex(const Digest& digest);
inline std::string sha256_hex(std::string_view bytes) { return to_hex(sha256(bytes)); }

}  // namespace hypervae::app
