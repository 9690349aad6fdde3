#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metascanner/world_model.hpp"

// Baseline QR codec: versions 1-5, byte mode, axis-aligned clean rasters.
// Reed-Solomon is used in detect-only mode, so a symbol with any nonzero
// syndrome is rejected rather than corrected.

namespace metascanner::qr {

inline constexpr int kMinVersion = 1;
inline constexpr int kMaxVersion = 5;
inline constexpr int kQuietZoneModules = 4;
inline constexpr int kLumaThreshold = 128;

enum class EcLevel { L, M, Q, H };
std::string_view to_string(EcLevel level);

constexpr int size_for_version(int version) { return 17 + 4 * version; }

/// Square grid of modules, true = dark. Row-major.
class ModuleMatrix {
 public:
  ModuleMatrix() = default;
  explicit ModuleMatrix(int size) : size_(size), dark_(static_cast<std::size_t>(size) * size, 0) {}

  int size() const { return size_; }
  bool dark(int row, int col) const { return dark_[static_cast<std::size_t>(row) * size_ + col] != 0; }
  void set(int row, int col, bool is_dark) {
    dark_[static_cast<std::size_t>(row) * size_ + col] = is_dark ? 1 : 0;
  }
  void flip(int row, int col) { set(row, col, !dark(row, col)); }

  friend bool operator==(const ModuleMatrix&, const ModuleMatrix&) = default;

 private:
  int size_ = 0;
  std::vector<std::uint8_t> dark_;
};

/// Modules that carry finder, separator, timing, alignment, format
/// information or the dark module for a given version.
ModuleMatrix function_pattern_mask(int version);

// --- Format information -------------------------------------------------

/// 15-bit masked format word for (level, mask).
std::uint32_t format_bits(EcLevel level, int mask);

/// BCH(15,5) remainder of an unmasked format word; zero for valid words.
std::uint32_t format_bch_remainder(std::uint32_t unmasked_word);

/// Format word copies as stored in the matrix: primary (around the
/// top-left finder) and secondary (split across the other two finders).
std::uint32_t read_format_primary(const ModuleMatrix& m);
std::uint32_t read_format_secondary(const ModuleMatrix& m);

/// Bit i of the primary format copy sits at (row, col) = position.first/second.
std::pair<int, int> format_primary_position(int bit_index);

bool mask_applies(int mask, int row, int col);

// --- Reed-Solomon over GF(256), primitive 0x11D --------------------------

std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b);
std::vector<std::uint8_t> rs_ec_codewords(std::span<const std::uint8_t> data, int ec_len);
/// Syndromes S_i = c(alpha^i), i in [0, ec_len). All zero for a codeword.
std::vector<std::uint8_t> rs_syndromes(std::span<const std::uint8_t> block, int ec_len);

struct BlockLayout {
  int ec_per_block = 0;
  int group1_blocks = 0;
  int group1_data = 0;
  int group2_blocks = 0;
  int group2_data = 0;

  int total_blocks() const { return group1_blocks + group2_blocks; }
  int data_codewords() const { return group1_blocks * group1_data + group2_blocks * group2_data; }
  int total_codewords() const { return data_codewords() + total_blocks() * ec_per_block; }
};

/// Throws UnsupportedFeature outside versions 1-5.
BlockLayout block_layout(int version, EcLevel level);

/// Largest byte-mode payload that fits (level, version).
int byte_capacity(int version, EcLevel level);

// --- Encoder --------------------------------------------------------------

struct EncodeOptions {
  EcLevel level = EcLevel::M;
  std::optional<int> version;  // smallest fitting version when absent
  std::optional<int> mask;     // lowest-penalty mask when absent
};

/// Byte-mode encoder. Throws UnsupportedFeature when the payload does not
/// fit in version 5 (or the requested version).
ModuleMatrix encode(std::string_view payload, const EncodeOptions& options = {});

/// Renders a matrix to RGBA with `module_px` pixels per module and a light
/// quiet zone of `quiet_modules` on every side.
TextureAsset render(const ModuleMatrix& m, int module_px, int quiet_modules = kQuietZoneModules,
                    std::string texture_id = {});

/// Copies `m` into an existing texture with its top-left module at (x, y).
void stamp(TextureAsset& tex, const ModuleMatrix& m, int x, int y, int module_px);

// --- Locator and decoder --------------------------------------------------

/// Candidate symbol region in pixel coordinates (continuous, top-left origin).
struct SymbolBounds {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  int modules = 0;  // grid size implied by finder spacing

  friend bool operator==(const SymbolBounds&, const SymbolBounds&) = default;
};

/// Light/dark raster after luma thresholding (pixels composited over white).
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> dark;  // 1 = dark
  bool at(int x, int y) const { return dark[static_cast<std::size_t>(y) * width + x] != 0; }
};

BinaryImage binarize(const TextureAsset& tex);

/// Triples of 1:1:3:1:1 finder patterns forming an axis-aligned right
/// angle, each surrounded by a quiet zone of at least four light modules.
std::vector<SymbolBounds> locate_finder_patterns(const TextureAsset& tex);
std::vector<SymbolBounds> locate_finder_patterns(const BinaryImage& img);

ModuleMatrix sample_grid(const BinaryImage& img, const SymbolBounds& bounds);

struct QrSymbol {
  std::string texture_id;
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  int version = 0;
  std::optional<EcLevel> ec_level;
  std::string payload;  // raw bytes; nonempty iff decode_ok
  bool decode_ok = false;
  std::string failure;  // reason when !decode_ok

  friend bool operator==(const QrSymbol&, const QrSymbol&) = default;
};

/// Decodes a sampled grid. Throws FormatInfoError, SyndromeError or
/// UnsupportedFeature; never returns an unverified payload.
QrSymbol decode_matrix(const ModuleMatrix& m);

/// Samples and decodes one located symbol. Throws like decode_matrix.
QrSymbol decode_symbol(const TextureAsset& tex, const SymbolBounds& bounds);

/// Locates and decodes every symbol in a texture. Failures are returned as
/// symbols with decode_ok = false and a reason, ordered by (y, x).
std::vector<QrSymbol> scan_texture(const TextureAsset& tex);

}  // namespace metascanner::qr
