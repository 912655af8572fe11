#pragma once

#include "hypervae/mdn/mdn.hpp"
#include "hypervae/vae/vae.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

namespace hypervae::app {

using Model = std::variant<vae::VaeParameters, mdn::MdnParameters>;

inline constexpr std::uint32_t checkpoint_format_version = 1;

// Container layout (all integers little-endian):
//   8 bytes   magic "HYPVAECK"
//   u32       format version
//   u64       header length L
//   L bytes   JSON header: model ("vae" | "mdn"), kind, architecture, kl_weight,
//             grid (id, mission, band_centers), normalization (min, max,
//             computed_on), batch-norm settings, and the ordered tensor list
//             [{name, size}] covering parameters then running stats
//   payload   every listed tensor as row-major float64, in list order
//   32 bytes  SHA-256 of all preceding bytes
std::string serialize_checkpoint(const Model& model);
Model deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace hypervae::app
