#include "metascanner/qr_codec.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "metascanner/errors.hpp"

namespace metascanner::qr {

std::string_view to_string(EcLevel level) {
  switch (level) {
    case EcLevel::L: return "L";
    case EcLevel::M: return "M";
    case EcLevel::Q: return "Q";
    case EcLevel::H: return "H";
  }
  return "?";
}

namespace {

int ecl_format_bits(EcLevel level) {
  switch (level) {
    case EcLevel::L: return 1;
    case EcLevel::M: return 0;
    case EcLevel::Q: return 3;
    case EcLevel::H: return 2;
  }
  return 0;
}

EcLevel ecl_from_format_bits(int bits) {
  switch (bits & 3) {
    case 1: return EcLevel::L;
    case 0: return EcLevel::M;
    case 3: return EcLevel::Q;
    default: return EcLevel::H;
  }
}

constexpr std::uint32_t kFormatMask = 0x5412;
constexpr std::uint32_t kFormatGenerator = 0x537;

struct GaloisTables {
  std::array<std::uint8_t, 512> exp{};
  std::array<int, 256> log{};
  GaloisTables() {
    int x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = static_cast<std::uint8_t>(x);
      log[x] = i;
      x <<= 1;
      if (x & 0x100) x ^= 0x11D;
    }
    for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
  }
};

const GaloisTables& gf() {
  static const GaloisTables tables;
  return tables;
}

// Zigzag data placement order over non-function modules, as (row, col).
std::vector<std::pair<int, int>> data_module_order(int version) {
  const ModuleMatrix fn = function_pattern_mask(version);
  const int n = fn.size();
  std::vector<std::pair<int, int>> order;
  for (int right = n - 1; right >= 1; right -= 2) {
    if (right == 6) right = 5;
    for (int vert = 0; vert < n; ++vert) {
      for (int j = 0; j < 2; ++j) {
        const int col = right - j;
        const bool upward = ((right + 1) & 2) == 0;
        const int row = upward ? n - 1 - vert : vert;
        if (!fn.dark(row, col)) order.emplace_back(row, col);
      }
    }
  }
  return order;
}

std::pair<int, int> format_secondary_position(int n, int i) {
  if (i < 8) return {8, n - 1 - i};
  return {n - 15 + i, 8};
}

void draw_function_patterns(ModuleMatrix& m, int version) {
  const int n = m.size();
  for (int i = 0; i < n; ++i) {
    m.set(6, i, i % 2 == 0);
    m.set(i, 6, i % 2 == 0);
  }
  auto finder = [&](int cr, int cc) {
    for (int dr = -4; dr <= 4; ++dr) {
      for (int dc = -4; dc <= 4; ++dc) {
        const int r = cr + dr;
        const int c = cc + dc;
        if (r < 0 || r >= n || c < 0 || c >= n) continue;
        const int dist = std::max(std::abs(dr), std::abs(dc));
        m.set(r, c, dist != 2 && dist != 4);
      }
    }
  };
  finder(3, 3);
  finder(3, n - 4);
  finder(n - 4, 3);
  if (version >= 2) {
    const int a = n - 7;
    for (int dr = -2; dr <= 2; ++dr) {
      for (int dc = -2; dc <= 2; ++dc) {
        m.set(a + dr, a + dc, std::max(std::abs(dr), std::abs(dc)) != 1);
      }
    }
  }
}

void draw_format(ModuleMatrix& m, std::uint32_t bits) {
  const int n = m.size();
  for (int i = 0; i < 15; ++i) {
    const bool bit = (bits >> i) & 1;
    const auto [r1, c1] = format_primary_position(i);
    m.set(r1, c1, bit);
    const auto [r2, c2] = format_secondary_position(n, i);
    m.set(r2, c2, bit);
  }
  m.set(n - 8, 8, true);
}

int penalty(const ModuleMatrix& m) {
  const int n = m.size();
  int score = 0;
  // Runs of five or more.
  for (int pass = 0; pass < 2; ++pass) {
    for (int a = 0; a < n; ++a) {
      int run = 1;
      for (int b = 1; b <= n; ++b) {
        const bool same = b < n && (pass == 0 ? m.dark(a, b) == m.dark(a, b - 1)
                                              : m.dark(b, a) == m.dark(b - 1, a));
        if (same) {
          ++run;
        } else {
          if (run >= 5) score += 3 + (run - 5);
          run = 1;
        }
      }
    }
  }
  // 2x2 blocks.
  for (int r = 0; r + 1 < n; ++r) {
    for (int c = 0; c + 1 < n; ++c) {
      const bool d = m.dark(r, c);
      if (d == m.dark(r, c + 1) && d == m.dark(r + 1, c) && d == m.dark(r + 1, c + 1)) score += 3;
    }
  }
  // Finder-like sequences.
  static constexpr std::array<bool, 11> kA = {1, 0, 1, 1, 1, 0, 1, 0, 0, 0, 0};
  static constexpr std::array<bool, 11> kB = {0, 0, 0, 0, 1, 0, 1, 1, 1, 0, 1};
  for (int pass = 0; pass < 2; ++pass) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b + 11 <= n; ++b) {
        bool ma = true;
        bool mb = true;
        for (int k = 0; k < 11; ++k) {
          const bool d = pass == 0 ? m.dark(a, b + k) : m.dark(b + k, a);
          ma = ma && d == kA[k];
          mb = mb && d == kB[k];
        }
        score += (ma ? 40 : 0) + (mb ? 40 : 0);
      }
    }
  }
  // Dark balance.
  long dark = 0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) dark += m.dark(r, c);
  }
  const long total = static_cast<long>(n) * n;
  const long k = (std::abs(dark * 20 - total * 10) + total - 1) / total - 1;
  score += static_cast<int>(k) * 10;
  return score;
}

class BitWriter {
 public:
  void put(std::uint32_t value, int bits) {
    for (int i = bits - 1; i >= 0; --i) bits_.push_back((value >> i) & 1);
  }
  std::size_t size() const { return bits_.size(); }
  std::vector<std::uint8_t> bytes() const {
    std::vector<std::uint8_t> out((bits_.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      if (bits_[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80 >> (i % 8));
    }
    return out;
  }

 private:
  std::vector<std::uint8_t> bits_;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::size_t remaining() const { return bytes_.size() * 8 - pos_; }
  std::uint32_t get(int bits) {
    std::uint32_t v = 0;
    for (int i = 0; i < bits; ++i, ++pos_) {
      v = (v << 1) | ((bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1);
    }
    return v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t read_format_word(const ModuleMatrix& m, bool primary) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 15; ++i) {
    const auto [r, c] = primary ? format_primary_position(i) : format_secondary_position(m.size(), i);
    if (m.dark(r, c)) bits |= 1u << i;
  }
  return bits;
}

}  // namespace

std::pair<int, int> format_primary_position(int i) {
  if (i <= 5) return {i, 8};
  if (i == 6) return {7, 8};
  if (i == 7) return {8, 8};
  if (i == 8) return {8, 7};
  return {8, 14 - i};
}

std::uint32_t read_format_primary(const ModuleMatrix& m) { return read_format_word(m, true); }
std::uint32_t read_format_secondary(const ModuleMatrix& m) { return read_format_word(m, false); }

ModuleMatrix function_pattern_mask(int version) {
  const int n = size_for_version(version);
  ModuleMatrix fn(n);
  auto fill = [&](int r0, int c0, int rows, int cols) {
    for (int r = r0; r < r0 + rows; ++r) {
      for (int c = c0; c < c0 + cols; ++c) fn.set(r, c, true);
    }
  };
  fill(0, 0, 9, 9);          // top-left finder, separator, format
  fill(0, n - 8, 9, 8);      // top-right finder, separator, format row
  fill(n - 8, 0, 8, 9);      // bottom-left finder, separator, format column, dark module
  fill(6, 0, 1, n);          // timing
  fill(0, 6, n, 1);
  if (version >= 2) fill(n - 9, n - 9, 5, 5);
  return fn;
}

std::uint32_t format_bits(EcLevel level, int mask) {
  const std::uint32_t data = static_cast<std::uint32_t>(ecl_format_bits(level) << 3 | mask);
  std::uint32_t rem = data;
  for (int i = 0; i < 10; ++i) rem = (rem << 1) ^ ((rem >> 9) * kFormatGenerator);
  return ((data << 10) | (rem & 0x3FF)) ^ kFormatMask;
}

std::uint32_t format_bch_remainder(std::uint32_t word) {
  word &= 0x7FFF;
  for (int bit = 14; bit >= 10; --bit) {
    if (word & (1u << bit)) word ^= kFormatGenerator << (bit - 10);
  }
  return word & 0x3FF;
}

bool mask_applies(int mask, int row, int col) {
  const int x = col;
  const int y = row;
  switch (mask) {
    case 0: return (x + y) % 2 == 0;
    case 1: return y % 2 == 0;
    case 2: return x % 3 == 0;
    case 3: return (x + y) % 3 == 0;
    case 4: return (x / 3 + y / 2) % 2 == 0;
    case 5: return x * y % 2 + x * y % 3 == 0;
    case 6: return (x * y % 2 + x * y % 3) % 2 == 0;
    case 7: return ((x + y) % 2 + x * y % 3) % 2 == 0;
    default: return false;
  }
}

std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b) {
  if (a == 0 || b == 0) return 0;
  const auto& t = gf();
  return t.exp[t.log[a] + t.log[b]];
}

std::vector<std::uint8_t> rs_ec_codewords(std::span<const std::uint8_t> data, int ec_len) {
  const auto& t = gf();
  // Generator with roots alpha^0 .. alpha^(ec_len-1), highest coefficient first.
  std::vector<std::uint8_t> gen{1};
  for (int i = 0; i < ec_len; ++i) {
    std::vector<std::uint8_t> next(gen.size() + 1, 0);
    for (std::size_t j = 0; j < gen.size(); ++j) {
      next[j] ^= gen[j];
      next[j + 1] ^= gf_mul(gen[j], t.exp[i]);
    }
    gen = std::move(next);
  }
  std::vector<std::uint8_t> msg(data.begin(), data.end());
  msg.resize(data.size() + ec_len, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::uint8_t coef = msg[i];
    if (coef == 0) continue;
    for (int j = 1; j <= ec_len; ++j) msg[i + j] ^= gf_mul(gen[j], coef);
  }
  return {msg.begin() + static_cast<std::ptrdiff_t>(data.size()), msg.end()};
}

std::vector<std::uint8_t> rs_syndromes(std::span<const std::uint8_t> block, int ec_len) {
  const auto& t = gf();
  std::vector<std::uint8_t> out(ec_len, 0);
  for (int i = 0; i < ec_len; ++i) {
    std::uint8_t s = 0;
    for (std::uint8_t c : block) s = static_cast<std::uint8_t>(gf_mul(s, t.exp[i]) ^ c);
    out[i] = s;
  }
  return out;
}

BlockLayout block_layout(int version, EcLevel level) {
  // {ec per block, g1 blocks, g1 data, g2 blocks, g2 data}
  static constexpr std::array<std::array<std::array<int, 5>, 4>, 5> kTable = {{
      {{{7, 1, 19, 0, 0}, {10, 1, 16, 0, 0}, {13, 1, 13, 0, 0}, {17, 1, 9, 0, 0}}},
      {{{10, 1, 34, 0, 0}, {16, 1, 28, 0, 0}, {22, 1, 22, 0, 0}, {28, 1, 16, 0, 0}}},
      {{{15, 1, 55, 0, 0}, {26, 1, 44, 0, 0}, {18, 2, 17, 0, 0}, {22, 2, 13, 0, 0}}},
      {{{20, 1, 80, 0, 0}, {18, 2, 32, 0, 0}, {26, 2, 24, 0, 0}, {16, 4, 9, 0, 0}}},
      {{{26, 1, 108, 0, 0}, {24, 2, 43, 0, 0}, {18, 2, 15, 2, 16}, {22, 2, 11, 2, 12}}},
  }};
  if (version < kMinVersion || version > kMaxVersion) {
    throw UnsupportedFeature("QR version " + std::to_string(version) + " is outside 1-5");
  }
  const auto& row = kTable[version - 1][static_cast<int>(level)];
  return {row[0], row[1], row[2], row[3], row[4]};
}

int byte_capacity(int version, EcLevel level) {
  return (block_layout(version, level).data_codewords() * 8 - 12) / 8;
}

ModuleMatrix encode(std::string_view payload, const EncodeOptions& options) {
  int version = 0;
  if (options.version) {
    version = *options.version;
    if (static_cast<int>(payload.size()) > byte_capacity(version, options.level)) {
      throw UnsupportedFeature("payload does not fit in the requested version");
    }
  } else {
    for (int v = kMinVersion; v <= kMaxVersion && version == 0; ++v) {
      if (static_cast<int>(payload.size()) <= byte_capacity(v, options.level)) version = v;
    }
    if (version == 0) throw UnsupportedFeature("payload too long for QR version 5");
  }
  const BlockLayout layout = block_layout(version, options.level);
  const std::size_t capacity_bits = static_cast<std::size_t>(layout.data_codewords()) * 8;

  BitWriter bw;
  bw.put(0b0100, 4);
  bw.put(static_cast<std::uint32_t>(payload.size()), 8);
  for (char ch : payload) bw.put(static_cast<std::uint8_t>(ch), 8);
  bw.put(0, static_cast<int>(std::min<std::size_t>(4, capacity_bits - bw.size())));
  bw.put(0, static_cast<int>((8 - bw.size() % 8) % 8));
  std::vector<std::uint8_t> data = bw.bytes();
  for (std::uint8_t pad = 0xEC; data.size() < static_cast<std::size_t>(layout.data_codewords());
       pad ^= 0xEC ^ 0x11) {
    data.push_back(pad);
  }

  // Split into blocks, append EC, interleave.
  std::vector<std::vector<std::uint8_t>> blocks;
  std::vector<std::vector<std::uint8_t>> ecs;
  std::size_t offset = 0;
  for (int b = 0; b < layout.total_blocks(); ++b) {
    const int len = b < layout.group1_blocks ? layout.group1_data : layout.group2_data;
    blocks.emplace_back(data.begin() + static_cast<std::ptrdiff_t>(offset),
                        data.begin() + static_cast<std::ptrdiff_t>(offset + len));
    ecs.push_back(rs_ec_codewords(blocks.back(), layout.ec_per_block));
    offset += len;
  }
  std::vector<std::uint8_t> codewords;
  const int max_data = std::max(layout.group1_data, layout.group2_data);
  for (int i = 0; i < max_data; ++i) {
    for (const auto& b : blocks) {
      if (i < static_cast<int>(b.size())) codewords.push_back(b[i]);
    }
  }
  for (int i = 0; i < layout.ec_per_block; ++i) {
    for (const auto& e : ecs) codewords.push_back(e[i]);
  }

  ModuleMatrix base(size_for_version(version));
  draw_function_patterns(base, version);
  const auto order = data_module_order(version);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const bool bit = i < codewords.size() * 8 && ((codewords[i / 8] >> (7 - i % 8)) & 1);
    base.set(order[i].first, order[i].second, bit);
  }

  auto masked = [&](int mask) {
    ModuleMatrix m = base;
    for (const auto& [r, c] : order) {
      if (mask_applies(mask, r, c)) m.flip(r, c);
    }
    draw_format(m, format_bits(options.level, mask));
    return m;
  };
  if (options.mask) return masked(*options.mask);
  ModuleMatrix best;
  int best_score = std::numeric_limits<int>::max();
  for (int mask = 0; mask < 8; ++mask) {
    ModuleMatrix m = masked(mask);
    const int score = penalty(m);
    if (score < best_score) {
      best_score = score;
      best = std::move(m);
    }
  }
  return best;
}

void stamp(TextureAsset& tex, const ModuleMatrix& m, int x, int y, int module_px) {
  for (int r = 0; r < m.size(); ++r) {
    for (int c = 0; c < m.size(); ++c) {
      const std::uint8_t v = m.dark(r, c) ? 0 : 255;
      for (int py = 0; py < module_px; ++py) {
        const int yy = y + r * module_px + py;
        if (yy < 0 || yy >= tex.height) continue;
        for (int px = 0; px < module_px; ++px) {
          const int xx = x + c * module_px + px;
          if (xx < 0 || xx >= tex.width) continue;
          std::uint8_t* p = tex.pixels.data() + (static_cast<std::size_t>(yy) * tex.width + xx) * 4;
          p[0] = p[1] = p[2] = v;
          p[3] = 255;
        }
      }
    }
  }
}

TextureAsset render(const ModuleMatrix& m, int module_px, int quiet_modules, std::string texture_id) {
  TextureAsset tex;
  tex.id = std::move(texture_id);
  tex.width = tex.height = (m.size() + 2 * quiet_modules) * module_px;
  tex.pixels.assign(static_cast<std::size_t>(tex.width) * tex.height * 4, 255);
  stamp(tex, m, quiet_modules * module_px, quiet_modules * module_px, module_px);
  return tex;
}

BinaryImage binarize(const TextureAsset& tex) {
  BinaryImage img;
  img.width = tex.width;
  img.height = tex.height;
  const std::size_t count = static_cast<std::size_t>(tex.width) * tex.height;
  img.dark.resize(count);
  const std::uint8_t* p = tex.pixels.data();
  for (std::size_t i = 0; i < count; ++i, p += 4) {
    // Composite over white, then Rec. 601 luma in fixed point.
    const unsigned a = p[3];
    unsigned r = p[0];
    unsigned g = p[1];
    unsigned b = p[2];
    if (a != 255) {
      const unsigned inv = 255 - a;
      r = (r * a + 255 * inv) / 255;
      g = (g * a + 255 * inv) / 255;
      b = (b * a + 255 * inv) / 255;
    }
    const unsigned luma = (299 * r + 587 * g + 114 * b) / 1000;
    img.dark[i] = luma < static_cast<unsigned>(kLumaThreshold) ? 1 : 0;
  }
  return img;
}

namespace {

struct FinderCandidate {
  double cx = 0.0;
  double cy = 0.0;
  double module = 0.0;
  int hits = 0;
};

bool ratio_ok(const std::array<int, 5>& runs) {
  const int total = runs[0] + runs[1] + runs[2] + runs[3] + runs[4];
  if (total < 7) return false;
  const double m = total / 7.0;
  const double var = m / 2.0;
  return std::abs(m - runs[0]) < var && std::abs(m - runs[1]) < var &&
         std::abs(3 * m - runs[2]) < 3 * var && std::abs(m - runs[3]) < var &&
         std::abs(m - runs[4]) < var;
}

/// Runs along a line through (x, y) in direction (dx, dy), centered on the
/// dark run containing the start pixel. Returns the center coordinate along
/// the line and the total pattern length, or nothing.
std::optional<std::pair<double, int>> cross_check(const BinaryImage& img, int x, int y, int dx,
                                                  int dy, int max_run) {
  auto dark = [&](int i) {
    const int xx = x + dx * i;
    const int yy = y + dy * i;
    if (xx < 0 || yy < 0 || xx >= img.width || yy >= img.height) return -1;
    return img.at(xx, yy) ? 1 : 0;
  };
  if (dark(0) != 1) return std::nullopt;
  std::array<int, 5> runs{};
  int i = 0;
  while (dark(i) == 1) { ++runs[2]; --i; }
  const int center_lo = i + 1;
  while (dark(i) == 0 && runs[1] <= max_run) { ++runs[1]; --i; }
  while (dark(i) == 1 && runs[0] <= max_run) { ++runs[0]; --i; }
  int j = 1;
  while (dark(j) == 1) { ++runs[2]; ++j; }
  const int center_hi = j;
  while (dark(j) == 0 && runs[3] <= max_run) { ++runs[3]; ++j; }
  while (dark(j) == 1 && runs[4] <= max_run) { ++runs[4]; ++j; }
  if (!ratio_ok(runs)) return std::nullopt;
  const int origin = dx != 0 ? x : y;
  return std::make_pair(origin + (center_lo + center_hi) / 2.0,
                        runs[0] + runs[1] + runs[2] + runs[3] + runs[4]);
}

void add_candidate(std::vector<FinderCandidate>& out, double cx, double cy, double module) {
  for (auto& c : out) {
    if (std::abs(c.cx - cx) <= c.module && std::abs(c.cy - cy) <= c.module &&
        std::abs(c.module - module) <= std::max(1.0, 0.5 * c.module)) {
      const double w = c.hits;
      c.cx = (c.cx * w + cx) / (w + 1);
      c.cy = (c.cy * w + cy) / (w + 1);
      c.module = (c.module * w + module) / (w + 1);
      ++c.hits;
      return;
    }
  }
  out.push_back({cx, cy, module, 1});
}

std::vector<FinderCandidate> find_finders(const BinaryImage& img) {
  std::vector<FinderCandidate> found;
  std::vector<std::pair<int, int>> runs;  // (start, length), alternating colors
  for (int y = 0; y < img.height; ++y) {
    const std::uint8_t* row = img.dark.data() + static_cast<std::size_t>(y) * img.width;
    runs.clear();
    bool first_dark = row[0] != 0;
    int start = 0;
    for (int x = 1; x <= img.width; ++x) {
      if (x == img.width || row[x] != row[x - 1]) {
        runs.emplace_back(start, x - start);
        start = x;
      }
    }
    if (runs.size() < 5) continue;
    // Windows of five runs starting on a dark run.
    for (std::size_t k = first_dark ? 0 : 1; k + 4 < runs.size(); k += 2) {
      const std::array<int, 5> lens = {runs[k].second, runs[k + 1].second, runs[k + 2].second,
                                       runs[k + 3].second, runs[k + 4].second};
      if (!ratio_ok(lens)) continue;
      const int total = lens[0] + lens[1] + lens[2] + lens[3] + lens[4];
      const double cx = runs[k + 2].first + lens[2] / 2.0;
      const auto vert = cross_check(img, static_cast<int>(cx), y, 0, 1, total);
      if (!vert) continue;
      const auto horiz =
          cross_check(img, static_cast<int>(cx), static_cast<int>(vert->first), 1, 0, total);
      if (!horiz) continue;
      add_candidate(found, horiz->first, vert->first, (horiz->second + vert->second) / 14.0);
    }
  }
  return found;
}

bool quiet_zone_ok(const BinaryImage& img, const SymbolBounds& b, double mx, double my) {
  const double qx = kQuietZoneModules * mx;
  const double qy = kQuietZoneModules * my;
  const double ox0 = b.x - qx;
  const double oy0 = b.y - qy;
  const double ox1 = b.x + b.w + qx;
  const double oy1 = b.y + b.h + qy;
  if (ox0 < -0.5 || oy0 < -0.5 || ox1 > img.width + 0.5 || oy1 > img.height + 0.5) return false;
  const int px0 = std::max(0, static_cast<int>(std::floor(ox0 + 0.5)));
  const int py0 = std::max(0, static_cast<int>(std::floor(oy0 + 0.5)));
  const int px1 = std::min(img.width, static_cast<int>(std::ceil(ox1 - 0.5)));
  const int py1 = std::min(img.height, static_cast<int>(std::ceil(oy1 - 0.5)));
  for (int y = py0; y < py1; ++y) {
    const double cy = y + 0.5;
    const bool inner_row = cy > b.y - 0.5 && cy < b.y + b.h + 0.5;
    for (int x = px0; x < px1; ++x) {
      const double cx = x + 0.5;
      if (inner_row && cx > b.x - 0.5 && cx < b.x + b.w + 0.5) {
        x = static_cast<int>(std::ceil(b.x + b.w + 0.5)) - 1;  // skip the symbol
        continue;
      }
      if (img.at(x, y)) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<SymbolBounds> locate_finder_patterns(const BinaryImage& img) {
  std::vector<SymbolBounds> out;
  if (img.width < 21 || img.height < 21) return out;
  const auto finders = find_finders(img);
  for (const auto& tl : finders) {
    for (const auto& tr : finders) {
      if (&tr == &tl || tr.cx <= tl.cx || std::abs(tr.cy - tl.cy) > tl.module) continue;
      for (const auto& bl : finders) {
        if (&bl == &tl || &bl == &tr || bl.cy <= tl.cy || std::abs(bl.cx - tl.cx) > tl.module) {
          continue;
        }
        const double ms = (tl.module + tr.module + bl.module) / 3.0;
        if (std::abs(tr.module - tl.module) > 0.3 * ms || std::abs(bl.module - tl.module) > 0.3 * ms) {
          continue;
        }
        const double dx = tr.cx - tl.cx;
        const double dy = bl.cy - tl.cy;
        if (std::abs(dx - dy) > 2.0 * ms) continue;
        const double dim_est = (dx + dy) / 2.0 / ms + 7.0;
        const int version = static_cast<int>(std::lround((dim_est - 17.0) / 4.0));
        if (version < 1 || version > 40) continue;
        const int dim = size_for_version(version);
        if (std::abs(dim_est - dim) > 2.0) continue;
        const double mx = dx / (dim - 7);
        const double my = dy / (dim - 7);
        SymbolBounds b{tl.cx - 3.5 * mx, tl.cy - 3.5 * my, dim * mx, dim * my, dim};
        if (b.x < -0.5 || b.y < -0.5 || b.x + b.w > img.width + 0.5 ||
            b.y + b.h > img.height + 0.5) {
          continue;
        }
        if (!quiet_zone_ok(img, b, mx, my)) continue;
        const bool dup = std::any_of(out.begin(), out.end(), [&](const SymbolBounds& o) {
          return b.x < o.x + o.w && o.x < b.x + b.w && b.y < o.y + o.h && o.y < b.y + b.h;
        });
        if (!dup) out.push_back(b);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const SymbolBounds& a, const SymbolBounds& b) {
    return std::tie(a.y, a.x) < std::tie(b.y, b.x);
  });
  return out;
}

std::vector<SymbolBounds> locate_finder_patterns(const TextureAsset& tex) {
  return locate_finder_patterns(binarize(tex));
}

ModuleMatrix sample_grid(const BinaryImage& img, const SymbolBounds& b) {
  ModuleMatrix m(b.modules);
  const double mx = b.w / b.modules;
  const double my = b.h / b.modules;
  for (int r = 0; r < b.modules; ++r) {
    const int py = std::clamp(static_cast<int>(std::floor(b.y + (r + 0.5) * my)), 0, img.height - 1);
    for (int c = 0; c < b.modules; ++c) {
      const int px =
          std::clamp(static_cast<int>(std::floor(b.x + (c + 0.5) * mx)), 0, img.width - 1);
      m.set(r, c, img.at(px, py));
    }
  }
  return m;
}

QrSymbol decode_matrix(const ModuleMatrix& m) {
  const int n = m.size();
  if (n < 21 || (n - 17) % 4 != 0) {
    throw UnsupportedFeature("grid of " + std::to_string(n) + " modules is not a QR size");
  }
  const int version = (n - 17) / 4;
  if (version > kMaxVersion) {
    throw UnsupportedFeature("QR version " + std::to_string(version) + " is outside 1-5");
  }

  const std::uint32_t primary = read_format_primary(m) ^ kFormatMask;
  const std::uint32_t secondary = read_format_secondary(m) ^ kFormatMask;
  if (format_bch_remainder(primary) != 0) {
    throw FormatInfoError("format information fails BCH check (primary copy)");
  }
  if (format_bch_remainder(secondary) != 0) {
    throw FormatInfoError("format information fails BCH check (secondary copy)");
  }
  if (primary != secondary) throw FormatInfoError("format information copies disagree");
  const EcLevel level = ecl_from_format_bits(static_cast<int>(primary >> 13));
  const int mask = static_cast<int>((primary >> 10) & 7);

  const BlockLayout layout = block_layout(version, level);
  const auto order = data_module_order(version);
  std::vector<std::uint8_t> codewords(layout.total_codewords(), 0);
  for (std::size_t i = 0; i < codewords.size() * 8; ++i) {
    const auto [r, c] = order[i];
    const bool bit = m.dark(r, c) != mask_applies(mask, r, c);
    if (bit) codewords[i / 8] |= static_cast<std::uint8_t>(0x80 >> (i % 8));
  }

  // De-interleave into blocks and verify each one.
  const int nblocks = layout.total_blocks();
  std::vector<std::vector<std::uint8_t>> blocks(nblocks);
  auto data_len = [&](int b) { return b < layout.group1_blocks ? layout.group1_data : layout.group2_data; };
  std::size_t k = 0;
  const int max_data = std::max(layout.group1_data, layout.group2_data);
  for (int i = 0; i < max_data; ++i) {
    for (int b = 0; b < nblocks; ++b) {
      if (i < data_len(b)) blocks[b].push_back(codewords[k++]);
    }
  }
  for (int i = 0; i < layout.ec_per_block; ++i) {
    for (int b = 0; b < nblocks; ++b) blocks[b].push_back(codewords[k++]);
  }
  std::vector<std::uint8_t> data;
  for (int b = 0; b < nblocks; ++b) {
    const auto syn = rs_syndromes(blocks[b], layout.ec_per_block);
    if (std::any_of(syn.begin(), syn.end(), [](std::uint8_t s) { return s != 0; })) {
      throw SyndromeError("Reed-Solomon syndromes nonzero in block " + std::to_string(b));
    }
    data.insert(data.end(), blocks[b].begin(), blocks[b].begin() + data_len(b));
  }

  QrSymbol sym;
  sym.version = version;
  sym.ec_level = level;
  BitReader br(data);
  while (br.remaining() >= 4) {
    const std::uint32_t mode = br.get(4);
    if (mode == 0) break;
    if (mode != 0b0100) {
      static constexpr const char* kModes[16] = {
          "terminator", "numeric", "alphanumeric", "structured append", "byte", "FNC1",
          "unknown",    "ECI",     "kanji",        "FNC1",              "unknown", "unknown",
          "unknown",    "unknown", "unknown",      "unknown"};
      throw UnsupportedFeature(std::string("unsupported segment mode: ") + kModes[mode]);
    }
    if (br.remaining() < 8) throw UnsupportedFeature("truncated byte segment header");
    const std::uint32_t count = br.get(8);
    if (br.remaining() < count * 8) throw UnsupportedFeature("truncated byte segment");
    for (std::uint32_t i = 0; i < count; ++i) sym.payload.push_back(static_cast<char>(br.get(8)));
  }
  if (sym.payload.empty()) throw UnsupportedFeature("symbol carries no byte payload");
  sym.decode_ok = true;
  return sym;
}

namespace {

QrSymbol decode_at(const BinaryImage& img, const SymbolBounds& bounds) {
  if (bounds.modules > size_for_version(kMaxVersion)) {
    throw UnsupportedFeature("QR version " + std::to_string((bounds.modules - 17) / 4) +
                             " is outside 1-5");
  }
  QrSymbol sym = decode_matrix(sample_grid(img, bounds));
  sym.x = static_cast<int>(std::lround(bounds.x));
  sym.y = static_cast<int>(std::lround(bounds.y));
  sym.w = static_cast<int>(std::lround(bounds.w));
  sym.h = static_cast<int>(std::lround(bounds.h));
  return sym;
}

}  // namespace

QrSymbol decode_symbol(const TextureAsset& tex, const SymbolBounds& bounds) {
  QrSymbol sym = decode_at(binarize(tex), bounds);
  sym.texture_id = tex.id;
  return sym;
}

std::vector<QrSymbol> scan_texture(const TextureAsset& tex) {
  const BinaryImage img = binarize(tex);
  std::vector<QrSymbol> out;
  for (const auto& b : locate_finder_patterns(img)) {
    QrSymbol sym;
    try {
      sym = decode_at(img, b);
    } catch (const Error& e) {
      sym = QrSymbol{};
      sym.x = static_cast<int>(std::lround(b.x));
      sym.y = static_cast<int>(std::lround(b.y));
      sym.w = static_cast<int>(std::lround(b.w));
      sym.h = static_cast<int>(std::lround(b.h));
      sym.version = (b.modules - 17) / 4;
      sym.failure = e.what();
    }
    sym.texture_id = tex.id;
    out.push_back(std::move(sym));
  }
  return out;
}

}  // namespace metascanner::qr
