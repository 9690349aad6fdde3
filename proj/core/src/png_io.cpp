#include "metascanner/png_io.hpp"

#include <png.h>

#include <fstream>
#include <iterator>

#include "metascanner/errors.hpp"

namespace metascanner {

TextureAsset decode_png(std::span<const std::uint8_t> bytes, std::string texture_id,
                        const std::string& file_label) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw ParseError(file_label, "header", image.message);
  }
  image.format = PNG_FORMAT_RGBA;
  TextureAsset tex;
  tex.id = std::move(texture_id);
  tex.width = static_cast<int>(image.width);
  tex.height = static_cast<int>(image.height);
  tex.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, tex.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ParseError(file_label, "data", msg);
  }
  return tex;
}

TextureAsset read_png(const std::filesystem::path& path, std::string texture_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_png(bytes, std::move(texture_id), path.string());
}

std::vector<std::uint8_t> encode_png(const TextureAsset& tex) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(tex.width);
  image.height = static_cast<png_uint_32>(tex.height);
  image.format = PNG_FORMAT_RGBA;
  image.flags = PNG_IMAGE_FLAG_FAST;
  // Worst-case buffer so the image is compressed in a single pass.
  png_alloc_size_t size = PNG_IMAGE_PNG_SIZE_MAX(image);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, tex.pixels.data(), 0, nullptr)) {
    throw IoError(std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

void write_png(const std::filesystem::path& path, const TextureAsset& tex) {
  const auto bytes = encode_png(tex);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace metascanner
