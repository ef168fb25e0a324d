#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "finex/image.hpp"

namespace finex::codec {

/// Decodes every page of a PNG, JPEG or (multi-page) TIFF file.
/// Colour images come back as RGB, everything else as gray.
std::vector<Image> read_pages(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Image& img);
Image decode_png(std::span<const std::uint8_t> bytes);
void write_png(const std::filesystem::path& path, const Image& img);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ProtocolError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

bool is_image_file(const std::filesystem::path& path);

}  // namespace finex::codec
