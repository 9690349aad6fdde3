#include <gtest/gtest.h>

#include "metascanner/errors.hpp"
#include "metascanner/qr_codec.hpp"
#include "metascanner/synth.hpp"
#include "metascanner/url_eval.hpp"
#include "test_support.hpp"

namespace ms = metascanner;
namespace ts = testing_support;

TEST(FixtureNames, ParseAndPrint) {
  for (auto k : ms::kAllAttacks) {
    const std::string name(ms::to_string(k));
    EXPECT_EQ(ms::parse_fixture_name(name), (ms::FixtureSpec{k, false}));
    EXPECT_EQ(ms::parse_fixture_name("benign-twin-of(" + name + ")"), (ms::FixtureSpec{k, true}));
    EXPECT_EQ(ms::parse_fixture_name("benign-twin-of:" + name), (ms::FixtureSpec{k, true}));
    EXPECT_EQ(ms::fixture_name({k, true}), "benign-twin-of-" + name);
  }
  EXPECT_FALSE(ms::parse_fixture_name("benign-twin-of(nothing)"));
  EXPECT_FALSE(ms::parse_fixture_name("rickroll"));
}

TEST(SynthesizeFixture, WritesLoadablePackage) {
  for (auto k : ms::kAllAttacks) {
    for (bool twin : {false, true}) {
      ts::TempDir dir;
      const auto built = ms::synthesize_fixture({k, twin}, dir.path() / "pkg");
      EXPECT_EQ(ms::load_package(dir.path() / "pkg").package, built) << ms::to_string(k);
      EXPECT_EQ(built, ms::build_fixture({k, twin}));
    }
  }
}

TEST(SynthesizeFixture, RefusesNonEmptyDirectory) {
  ts::TempDir dir;
  ts::write_text(dir / "keep.txt", "x");
  EXPECT_THROW(ms::synthesize_fixture({}, dir.path()), ms::IoError);
  EXPECT_EQ(ts::read_text(dir / "keep.txt"), "x");
}

TEST(SynthesizeFixture, QuishingCarriesDecodableBlockedAvatarQr) {
  const auto pkg = ms::build_fixture({ms::AttackKind::avatar_quishing, false});
  const auto symbols = ms::qr::scan_texture(pkg.textures.at("badge-qr"));
  ASSERT_EQ(symbols.size(), 1u);
  ASSERT_TRUE(symbols[0].decode_ok);
  EXPECT_EQ(ms::evaluate_url(symbols[0].payload, ms::UrlPolicy{}).verdict, ms::UrlClass::Blocked);
  const auto badge = std::find_if(pkg.nodes.begin(), pkg.nodes.end(), [](auto& n) { return n.id == "avatar-badge"; });
  ASSERT_NE(badge->avatar_owner(), nullptr);
}

TEST(CorpusPackage, RespectsBoundsAndIsDeterministic) {
  ms::CorpusOptions opt;
  opt.max_texture_px = 128;
  const auto a = ms::build_corpus_package(3, opt);
  EXPECT_EQ(a, ms::build_corpus_package(3, opt));
  EXPECT_NE(a, ms::build_corpus_package(4, opt));
  EXPECT_LE(a.nodes.size(), 1000u);
  EXPECT_EQ(a.scripts.size(), 20u);
  EXPECT_EQ(a.textures.size(), 10u);
  for (const auto& [id, t] : a.textures) {
    EXPECT_LE(t.width, 128);
    EXPECT_LE(t.height, 128);
  }
}

TEST(AttackCorpusPackage, ContainsEveryFixture) {
  const auto pkg = ms::build_attack_corpus();
  std::size_t nodes = 0;
  for (auto k : ms::kAllAttacks) nodes += ms::build_fixture({k, false}).nodes.size();
  EXPECT_EQ(pkg.nodes.size(), nodes);
  EXPECT_EQ(pkg.manifest.libraries.size(), 2u);
  EXPECT_TRUE(ms::build_attack_corpus(true).manifest.libraries.empty());
}
