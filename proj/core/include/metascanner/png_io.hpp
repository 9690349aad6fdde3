#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "metascanner/world_model.hpp"

namespace metascanner {

/// Decodes any PNG to 8-bit RGBA. Throws ParseError on corrupt data.
TextureAsset decode_png(std::span<const std::uint8_t> bytes, std::string texture_id,
                        const std::string& file_label = "texture");
TextureAsset read_png(const std::filesystem::path& path, std::string texture_id);

std::vector<std::uint8_t> encode_png(const TextureAsset& tex);
void write_png(const std::filesystem::path& path, const TextureAsset& tex);

}  // namespace metascanner
