#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metascanner/world_model.hpp"

namespace metascanner {

enum class AttackKind {
  clickjacking_same_position,
  clickjacking_invisible,
  denial_of_raycasting,
  object_in_the_middle,
  avatar_quishing,
};

inline constexpr AttackKind kAllAttacks[] = {
    AttackKind::clickjacking_same_position, AttackKind::clickjacking_invisible,
    AttackKind::denial_of_raycasting, AttackKind::object_in_the_middle,
    AttackKind::avatar_quishing};

std::string_view to_string(AttackKind kind);

struct FixtureSpec {
  AttackKind attack = AttackKind::clickjacking_same_position;
  bool benign_twin = false;
  friend bool operator==(const FixtureSpec&, const FixtureSpec&) = default;
};

/// Accepts "<attack>", "benign-twin-of(<attack>)" and "benign-twin-of:<attack>".
std::optional<FixtureSpec> parse_fixture_name(std::string_view name);
std::string fixture_name(const FixtureSpec& spec);

/// Deterministic fixture reproducing one attack, or its benign twin with
/// the attack ingredient removed.
WorldPackage build_fixture(const FixtureSpec& spec);

/// build_fixture + save_package. Throws IoError.
WorldPackage synthesize_fixture(const FixtureSpec& spec, const std::filesystem::path& out_dir);

/// Every attack fixture (or every benign twin) in one package, laid out
/// along +X with kAttackCorpusSpacing meters between fixtures. The attack
/// variant also references two libraries that no default list mentions.
inline constexpr double kAttackCorpusSpacing = 10.0;
WorldPackage build_attack_corpus(bool benign_twins = false);

/// Scale corpus: packages with up to `max_nodes` nodes, `scripts` scripts
/// and `textures` textures of at most `max_texture_px` square pixels.
struct CorpusOptions {
  int count = 38;
  int max_nodes = 1000;
  int scripts = 20;
  int textures = 10;
  int max_texture_px = 1024;
  std::uint64_t seed = 0x5eed;
};

WorldPackage build_corpus_package(int index, const CorpusOptions& options);

/// Writes packages "world-00" .. "world-NN" under `dir`; returns their paths.
std::vector<std::filesystem::path> synthesize_corpus(const std::filesystem::path& dir,
                                                     const CorpusOptions& options = {});

}  // namespace metascanner
