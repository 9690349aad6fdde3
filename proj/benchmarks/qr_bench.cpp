#include <benchmark/benchmark.h>

#include <string>

#include "metascanner/qr_codec.hpp"

namespace ms = metascanner;
namespace qr = metascanner::qr;

static void BM_Encode(benchmark::State& state) {
  const std::string payload(static_cast<std::size_t>(state.range(0)), 'x');
  for (auto _ : state) benchmark::DoNotOptimize(qr::encode(payload, {qr::EcLevel::L, 5, 0}));
}
BENCHMARK(BM_Encode)->Arg(16)->Arg(100);

static void BM_DecodeMatrix(benchmark::State& state) {
  const auto m = qr::encode("https://example.com/menu", {qr::EcLevel::M, 2, 3});
  for (auto _ : state) benchmark::DoNotOptimize(qr::decode_matrix(m));
}
BENCHMARK(BM_DecodeMatrix);

// One symbol stamped into an otherwise white square texture.
static void BM_ScanTexture(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  ms::TextureAsset tex;
  tex.id = "bench";
  tex.width = side;
  tex.height = side;
  tex.pixels.assign(static_cast<std::size_t>(side) * side * 4, 255);
  qr::stamp(tex, qr::encode("https://example.com/badge", {qr::EcLevel::M, 3, 1}), side / 4,
            side / 4, 4);
  for (auto _ : state) benchmark::DoNotOptimize(qr::scan_texture(tex));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(tex.pixels.size()));
}
BENCHMARK(BM_ScanTexture)->Arg(256)->Arg(1024);
