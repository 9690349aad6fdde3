#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "metascanner/errors.hpp"
#include "metascanner/world_model.hpp"
#include "test_support.hpp"
#include "transform_oracle.hpp"

namespace ms = metascanner;
namespace ts = testing_support;

namespace {

constexpr const char* kManifest =
    R"({"format_version":1,"world_id":"w","avatars":["a1"],"libraries":[]})";

ms::LoadResult load_world(const std::string& world, const ms::LoadOptions& opts = {}) {
  return ms::load_package_documents(kManifest, world, {}, {}, opts);
}

std::string error_of(const std::string& world) {
  try {
    load_world(world);
  } catch (const ms::ValidationError& e) {
    return e.what();
  }
  return "no error";
}

void expect_vec(ms::Vec3 got, ms::Vec3 want, double tol = 1e-12) {
  EXPECT_NEAR(got.x, want.x, tol);
  EXPECT_NEAR(got.y, want.y, tol);
  EXPECT_NEAR(got.z, want.z, tol);
}

}  // namespace

TEST(LoadPackage, EmptyNodeList) {
  const auto r = load_world(R"({"nodes":[],"materials":[]})");
  EXPECT_TRUE(r.package.nodes.empty());
  EXPECT_TRUE(r.warnings.empty());
}

TEST(LoadPackage, DuplicateNodeIdIsNamed) {
  const std::string msg = error_of(
      R"({"nodes":[{"id":"btn1","name":"a","transform":{}},{"id":"btn1","name":"b","transform":{}}]})");
  EXPECT_NE(msg.find("btn1"), std::string::npos) << msg;
}

TEST(LoadPackage, UnresolvedMaterialNamesNodeAndRef) {
  const std::string msg = error_of(
      R"({"nodes":[{"id":"crate","name":"crate","transform":{},"renderer":{"mesh":"box","material_ref":"missing"}}]})");
  EXPECT_NE(msg.find("crate"), std::string::npos) << msg;
  EXPECT_NE(msg.find("missing"), std::string::npos) << msg;
}

TEST(LoadPackage, RejectsParentCycle) {
  EXPECT_THROW(load_world(R"({"nodes":[{"id":"a","name":"a","parent":"b","transform":{}},
                                      {"id":"b","name":"b","parent":"a","transform":{}}]})"),
               ms::ValidationError);
}

TEST(LoadPackage, UnknownTopLevelKeyStrictVersusLenient) {
  const std::string world = R"({"nodes":[],"lights":[]})";
  EXPECT_THROW(load_world(world), ms::ValidationError);
  const auto r = load_world(world, {.lenient = true});
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("lights"), std::string::npos);
}

TEST(LoadPackage, MalformedJsonCarriesLocation) {
  try {
    load_world(R"({"nodes": [)");
    FAIL() << "expected ParseError";
  } catch (const ms::ParseError& e) {
    EXPECT_EQ(e.file(), "world.json");
    EXPECT_FALSE(e.location().empty());
  }
}

TEST(LoadPackage, UnsupportedFormatVersion) {
  EXPECT_THROW(ms::load_package_documents(R"({"format_version":7,"world_id":"w"})",
                                          R"({"nodes":[]})", {}, {}),
               ms::UnsupportedVersion);
}

TEST(LoadPackage, MissingDirectoryIsIoError) {
  EXPECT_THROW(ms::load_package("/nonexistent/metascanner/pkg"), ms::IoError);
}

TEST(LoadPackage, SaveThenLoadRoundTrips) {
  ts::TempDir dir;
  auto pkg = ts::package({ts::button("b", {0, 1, 0}, {1, 1, 1}, "s")},
                         {{"s", ts::sound_script("s")}});
  pkg.nodes.push_back(ts::box("child", {1, 0, 0}));
  pkg.nodes.back().parent = "b";
  pkg.nodes.back().tags = {"input-surface", "custom"};
  ms::save_package(pkg, dir.path());
  const auto loaded = ms::load_package(dir.path());
  EXPECT_EQ(loaded.package, pkg);
  EXPECT_EQ(ms::load_package(dir.path()).package, loaded.package);
}

TEST(LoadPackage, MutationBreakingReferenceIsRejected) {
  auto pkg = ts::package({ts::button("b", {0, 0, 0}, {1, 1, 1}, "s")}, {{"s", ts::sound_script("s")}});
  ASSERT_NO_THROW(ms::validate_package(pkg));
  pkg.scripts.clear();
  EXPECT_THROW(ms::validate_package(pkg), ms::ValidationError);
}

TEST(ResolveWorldTransforms, RootKeepsLocalPosition) {
  const auto pkg = ts::package({ts::box("n", {1, 2, 3})});
  expect_vec(ms::resolve_world_transforms(pkg)[0].position(), {1, 2, 3});
}

TEST(ResolveWorldTransforms, TranslationsAdd) {
  auto pkg = ts::package({ts::box("p", {0, 0, 1}), ts::box("c", {0, 0, 1})});
  pkg.nodes[1].parent = "p";
  expect_vec(ms::resolve_world_transforms(pkg)[1].position(), {0, 0, 2});
}

TEST(ResolveWorldTransforms, ParentScaleScalesChildOffset) {
  auto pkg = ts::package({ts::box("p", {0, 0, 0}, {2, 2, 2}), ts::box("c", {1, 0, 0})});
  pkg.nodes[1].parent = "p";
  expect_vec(ms::resolve_world_transforms(pkg)[1].position(), {2, 0, 0});
}

TEST(ResolveWorldTransforms, ChildListedBeforeParent) {
  auto pkg = ts::package({ts::box("c", {1, 0, 0}), ts::box("p", {0, 5, 0})});
  pkg.nodes[0].parent = "p";
  expect_vec(ms::resolve_world_transforms(pkg)[0].position(), {1, 5, 0});
}

// Random forests of up to 100 nodes against naive recursive matrix products.
TEST(ResolveWorldTransforms, MatchesNaiveCompositionOnRandomTrees) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(-3, 3), sc(0.2, 2.5), ang(-3.14, 3.14);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 100);
    std::vector<ms::SceneNode> nodes;
    for (int i = 0; i < n; ++i) {
      ms::SceneNode node = ts::box("n" + std::to_string(i), {pos(rng), pos(rng), pos(rng)},
                                   {sc(rng), sc(rng), sc(rng)});
      node.transform.rotation =
          ms::Quat::from_axis_angle(ms::normalized({pos(rng), pos(rng), pos(rng) + 0.01}), ang(rng));
      if (i > 0 && rng() % 4 != 0) node.parent = "n" + std::to_string(rng() % i);
      nodes.push_back(std::move(node));
    }
    // Shuffle so parents may follow children.
    std::shuffle(nodes.begin(), nodes.end(), rng);
    const auto pkg = ts::package(std::move(nodes));
    const auto world = ms::resolve_world_transforms(pkg);
    for (std::size_t i = 0; i < pkg.nodes.size(); ++i) {
      const auto m = oracle::world_matrix(pkg, pkg.nodes[i].id);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          ASSERT_NEAR(world[i].linear[r * 3 + c], m[r][c], 1e-9) << pkg.nodes[i].id;
        }
        ASSERT_NEAR(world[i].translation[r], m[r][3], 1e-9) << pkg.nodes[i].id;
      }
    }
  }
}

TEST(NodeIndex, CountsInteractables) {
  auto pkg = ts::package({ts::button("b1", {0, 0, 0}, {1, 1, 1}, "s"), ts::box("x1", {1, 0, 0}),
                          ts::button("b2", {2, 0, 0}, {1, 1, 1}, "s"), ts::box("x2", {3, 0, 0}),
                          ts::box("x3", {4, 0, 0})},
                         {{"s", ts::sound_script("s")}});
  const auto idx = ms::index_nodes(pkg);
  EXPECT_EQ(idx.interactables().size(), 2u);
  EXPECT_EQ(idx.colliders().size(), 5u);
}

TEST(NodeIndex, UntaggedSceneHasNoInputSurfaces) {
  const auto pkg = ts::package({ts::box("a", {0, 0, 0}), ts::box("b", {1, 0, 0})});
  EXPECT_TRUE(ms::index_nodes(pkg).with_tag(ms::kTagInputSurface).empty());
}

TEST(NodeIndex, AvatarOwnershipIsExact) {
  auto pkg = ts::package({ts::box("w", {0, 0, 0}), ts::box("a", {1, 0, 0}), ts::box("b", {2, 0, 0}),
                          ts::box("c", {3, 0, 0})});
  pkg.manifest.avatars = {"a1", "a2"};
  pkg.nodes[1].owner = ms::AvatarOwned{"a1"};
  pkg.nodes[2].owner = ms::AvatarOwned{"a2"};
  pkg.nodes[3].owner = ms::AvatarOwned{"a1"};
  const auto idx = ms::index_nodes(pkg);
  const auto owned = idx.owned_by_avatar("a1");
  EXPECT_EQ(std::vector<std::size_t>(owned.begin(), owned.end()), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(idx.world_owned().size(), 1u);
  EXPECT_EQ(idx.find("b")->id, "b");
  EXPECT_EQ(idx.find("zz"), nullptr);
}
