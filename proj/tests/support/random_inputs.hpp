#pragma once

// Seeded random inputs shared by the property tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "metascanner/geometry.hpp"
#include "metascanner/qr_codec.hpp"
#include "metascanner/script_scanner.hpp"

namespace testing_support {

/// Random well-formed graph of at most `max_nodes` nodes with data edges
/// drawn only between compatible ports, cycles allowed.
inline metascanner::ScriptGraph random_script_graph(std::mt19937_64& rng, int max_nodes) {
  namespace ms = metascanner;
  using K = ms::NodeKind;
  static const K kinds[] = {K::OnInteract,  K::OnKeyPress,    K::SendWebRequest, K::SetPersistent,
                            K::SetVariable, K::VariableRead,  K::Concat,         K::StringConst,
                            K::OpenURL,     K::Log,           K::PlaySound};
  ms::ScriptGraph g;
  g.id = "random";
  const int n = 1 + static_cast<int>(rng() % max_nodes);
  for (int i = 0; i < n; ++i) {
    ms::GraphNode node;
    node.id = "n" + std::to_string(i);
    node.kind = kinds[rng() % std::size(kinds)];
    if (node.kind == K::SetVariable || node.kind == K::VariableRead) {
      node.attrs["name"] = std::string(1, static_cast<char>('a' + rng() % 2));
    }
    if (node.kind == K::StringConst) node.attrs["value"] = "https://example.com/";
    if (ms::category_of(node.kind) == ms::NodeCategory::Event) g.events.push_back(i);
    g.nodes.push_back(std::move(node));
  }
  auto data_out = [&](std::size_t i) -> std::string {
    switch (ms::category_of(g.nodes[i].kind)) {
      case ms::NodeCategory::Event: return "payload";
      case ms::NodeCategory::Data: return "value";
      default: return "";
    }
  };
  auto data_in = [&](std::size_t i) -> std::vector<std::string> {
    switch (g.nodes[i].kind) {
      case K::SendWebRequest: return {"url", "data"};
      case K::SetPersistent: return {"data"};
      case K::SetVariable: return {"value"};
      case K::Concat: return {"a", "b"};
      case K::OpenURL: return {"url"};
      case K::Log: return {"message"};
      default: return {};
    }
  };
  const int edges = static_cast<int>(rng() % (2 * n + 1));
  for (int k = 0; k < edges; ++k) {
    const std::size_t a = rng() % n;
    const std::size_t b = rng() % n;
    const auto out = data_out(a);
    const auto ins = data_in(b);
    if (out.empty() || ins.empty()) continue;
    g.edges.push_back({a, out, b, ins[rng() % ins.size()]});
  }
  return g;
}

/// 1..max_boxes axis-aligned colliders in [-5, 5]^3; about one in ten is
/// disabled and one in ten does not block rays.
inline std::vector<metascanner::ColliderBox> random_collider_scene(std::mt19937_64& rng,
                                                                   int max_boxes) {
  std::uniform_real_distribution<double> u(-5, 5), h(0.05, 1.0);
  std::vector<metascanner::ColliderBox> boxes;
  const int n = 1 + static_cast<int>(rng() % max_boxes);
  for (int i = 0; i < n; ++i) {
    const metascanner::Vec3 c{u(rng), u(rng), u(rng)};
    const metascanner::Vec3 half{h(rng), h(rng), h(rng)};
    metascanner::ColliderBox box{"c" + std::to_string(i), {c - half, c + half}};
    box.enabled = rng() % 10 != 0;
    box.blocks_ray = rng() % 10 != 0;
    boxes.push_back(std::move(box));
  }
  return boxes;
}

/// Ray from a point in [-5, 5]^3 along a random unit direction.
inline metascanner::Ray random_ray(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-5, 5);
  return {{u(rng), u(rng), u(rng)}, metascanner::normalized({u(rng), u(rng), u(rng)})};
}

/// Inverts `fraction` of the non-function modules, chosen by a seeded shuffle.
inline metascanner::qr::ModuleMatrix invert_data_modules(metascanner::qr::ModuleMatrix m,
                                                         int version, double fraction,
                                                         unsigned seed) {
  const auto fn = metascanner::qr::function_pattern_mask(version);
  std::vector<std::pair<int, int>> cells;
  for (int r = 0; r < m.size(); ++r)
    for (int c = 0; c < m.size(); ++c)
      if (!fn.dark(r, c)) cells.emplace_back(r, c);
  std::mt19937 rng(seed);
  std::shuffle(cells.begin(), cells.end(), rng);
  const auto count = static_cast<std::size_t>(std::ceil(fraction * cells.size()));
  for (std::size_t i = 0; i < count; ++i) m.flip(cells[i].first, cells[i].second);
  return m;
}

}  // namespace testing_support
