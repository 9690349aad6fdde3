#include "metascanner/script_scanner.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "json_util.hpp"
#include "metascanner/errors.hpp"
#include "metascanner/parallel.hpp"
#include "metascanner/url_eval.hpp"

namespace metascanner {

using detail::Cursor;
using detail::DocContext;
using detail::json;

namespace {

constexpr NodeKind kAllKinds[] = {
    NodeKind::OnInteract,  NodeKind::OnKeyPress,  NodeKind::OpenURL,       NodeKind::SendWebRequest,
    NodeKind::PlayVideo,   NodeKind::SetVariable, NodeKind::SetPersistent, NodeKind::Log,
    NodeKind::PlaySound,   NodeKind::StringConst, NodeKind::Concat,        NodeKind::VariableRead,
};

bool in(std::string_view port, std::initializer_list<std::string_view> ports) {
  return std::find(ports.begin(), ports.end(), port) != ports.end();
}

bool is_url_action(NodeKind k) {
  return k == NodeKind::OpenURL || k == NodeKind::SendWebRequest || k == NodeKind::PlayVideo;
}

bool is_sink_port(NodeKind k, std::string_view port) {
  return (k == NodeKind::SendWebRequest || k == NodeKind::SetPersistent) && port == "data";
}

/// Output port that carries a data value out of `k`, if any.
std::string_view data_output(NodeKind k) {
  switch (category_of(k)) {
    case NodeCategory::Event: return "payload";
    case NodeCategory::Data: return "value";
    case NodeCategory::Action: return {};
  }
  return {};
}

}  // namespace

NodeCategory category_of(NodeKind kind) {
  switch (kind) {
    case NodeKind::OnInteract:
    case NodeKind::OnKeyPress: return NodeCategory::Event;
    case NodeKind::StringConst:
    case NodeKind::Concat:
    case NodeKind::VariableRead: return NodeCategory::Data;
    default: return NodeCategory::Action;
  }
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::OnInteract: return "OnInteract";
    case NodeKind::OnKeyPress: return "OnKeyPress";
    case NodeKind::OpenURL: return "OpenURL";
    case NodeKind::SendWebRequest: return "SendWebRequest";
    case NodeKind::PlayVideo: return "PlayVideo";
    case NodeKind::SetVariable: return "SetVariable";
    case NodeKind::SetPersistent: return "SetPersistent";
    case NodeKind::Log: return "Log";
    case NodeKind::PlaySound: return "PlaySound";
    case NodeKind::StringConst: return "StringConst";
    case NodeKind::Concat: return "Concat";
    case NodeKind::VariableRead: return "VariableRead";
  }
  return "?";
}

std::string_view to_string(VerdictClass v) {
  switch (v) {
    case VerdictClass::Benign: return "Benign";
    case VerdictClass::Redirector: return "Redirector";
    case VerdictClass::Exfiltrator: return "Exfiltrator";
  }
  return "?";
}

bool is_output_port(NodeKind kind, std::string_view port) {
  switch (category_of(kind)) {
    case NodeCategory::Event: return in(port, {"exec", "payload"});
    case NodeCategory::Action: return port == "exec";
    case NodeCategory::Data: return port == "value";
  }
  return false;
}

bool is_input_port(NodeKind kind, std::string_view port) {
  switch (kind) {
    case NodeKind::OnInteract:
    case NodeKind::OnKeyPress:
    case NodeKind::StringConst:
    case NodeKind::VariableRead: return false;
    case NodeKind::Concat: return in(port, {"a", "b"});
    case NodeKind::OpenURL:
    case NodeKind::PlayVideo: return in(port, {"exec", "url"});
    case NodeKind::SendWebRequest: return in(port, {"exec", "url", "data"});
    case NodeKind::SetVariable: return in(port, {"exec", "value"});
    case NodeKind::SetPersistent: return in(port, {"exec", "data"});
    case NodeKind::Log: return in(port, {"exec", "message"});
    case NodeKind::PlaySound: return port == "exec";
  }
  return false;
}

ScriptGraph parse_script(std::string_view document, std::string_view file) {
  DocContext ctx{std::string(file), false, nullptr};
  const json doc = detail::parse_json_document(document, ctx.file);
  const Cursor c(doc, ctx);
  c.check_keys({"id", "nodes", "edges", "events"});

  ScriptGraph g;
  g.id = c.child("id").string();
  const Cursor nodes = c.child("nodes");
  if (nodes.array().size() > kMaxScriptNodes) {
    nodes.invalid("graph has " + std::to_string(nodes.array().size()) + " nodes; limit is " +
                  std::to_string(kMaxScriptNodes));
  }
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < nodes.array().size(); ++i) {
    const Cursor n = nodes.element(i);
    n.check_keys({"id", "kind", "attrs"});
    GraphNode node;
    node.id = n.child("id").string();
    if (node.id.empty()) n.child("id").invalid("node id must be nonempty");
    const std::string kind = n.child("kind").string();
    const auto* k = std::find_if(std::begin(kAllKinds), std::end(kAllKinds),
                                 [&](NodeKind nk) { return to_string(nk) == kind; });
    if (k == std::end(kAllKinds)) n.child("kind").invalid("unknown node kind '" + kind + "'");
    node.kind = *k;
    if (n.has("attrs")) {
      const Cursor attrs = n.child("attrs");
      for (const auto& [key, _] : attrs.object().items()) {
        node.attrs[key] = attrs.child(key).string();
      }
    }
    const bool needs_value = node.kind == NodeKind::StringConst;
    const bool needs_name =
        node.kind == NodeKind::SetVariable || node.kind == NodeKind::VariableRead;
    if (needs_value && !node.attrs.count("value")) n.invalid("StringConst requires attrs.value");
    if (needs_name && !node.attrs.count("name")) {
      n.invalid(std::string(to_string(node.kind)) + " requires attrs.name");
    }
    if (!pos.emplace(node.id, g.nodes.size()).second) {
      n.invalid("duplicate node id '" + node.id + "'");
    }
    g.nodes.push_back(std::move(node));
  }

  auto lookup = [&](const Cursor& at, const std::string& id) {
    auto it = pos.find(id);
    if (it == pos.end()) at.invalid("edge references missing node '" + id + "'");
    return it->second;
  };

  if (c.has("edges")) {
    const Cursor edges = c.child("edges");
    for (std::size_t i = 0; i < edges.array().size(); ++i) {
      const Cursor e = edges.element(i);
      if (e.array().size() != 4) e.fail("edge must be [from, fromPort, to, toPort]");
      GraphEdge edge;
      edge.from = lookup(e, e.element(0).string());
      edge.from_port = e.element(1).string();
      edge.to = lookup(e, e.element(2).string());
      edge.to_port = e.element(3).string();
      const GraphNode& from = g.nodes[edge.from];
      const GraphNode& to = g.nodes[edge.to];
      if (!is_output_port(from.kind, edge.from_port)) {
        e.invalid("node '" + from.id + "' has no output port '" + edge.from_port + "'");
      }
      if (!is_input_port(to.kind, edge.to_port)) {
        e.invalid("node '" + to.id + "' has no input port '" + edge.to_port + "'");
      }
      if ((edge.from_port == "exec") != (edge.to_port == "exec")) {
        e.invalid("edge connects a control port to a data port");
      }
      g.edges.push_back(std::move(edge));
    }
  }

  if (c.has("events")) {
    const Cursor events = c.child("events");
    for (std::size_t i = 0; i < events.array().size(); ++i) {
      const Cursor e = events.element(i);
      const std::size_t p = lookup(e, e.string());
      if (category_of(g.nodes[p].kind) != NodeCategory::Event) {
        e.invalid("entry '" + g.nodes[p].id + "' is not an event node");
      }
      g.events.push_back(p);
    }
  } else {
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      if (category_of(g.nodes[i].kind) == NodeCategory::Event) g.events.push_back(i);
    }
  }
  return g;
}

namespace {

class UrlFolder {
 public:
  explicit UrlFolder(const ScriptGraph& g) : g_(g) {
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      incoming_[{g.edges[i].to, g.edges[i].to_port}].push_back(i);
    }
  }

  const std::vector<std::size_t>& incoming(std::size_t node, const std::string& port) const {
    static const std::vector<std::size_t> kNone;
    auto it = incoming_.find({node, port});
    return it == incoming_.end() ? kNone : it->second;
  }

  /// Constant value on (node, output port) or nullopt when not constant.
  std::optional<std::string> fold(std::size_t node, const std::string& port, int depth = 0) const {
    if (depth > static_cast<int>(kMaxScriptNodes)) return std::nullopt;  // Concat cycle
    const GraphNode& n = g_.nodes[node];
    if (port != "value") return std::nullopt;
    if (n.kind == NodeKind::StringConst) return n.attrs.at("value");
    if (n.kind != NodeKind::Concat) return std::nullopt;
    std::string out;
    for (const char* input : {"a", "b"}) {
      const auto& edges = incoming(node, input);
      if (edges.size() != 1) return std::nullopt;
      const GraphEdge& e = g_.edges[edges.front()];
      auto part = fold(e.from, e.from_port, depth + 1);
      if (!part) return std::nullopt;
      out += *part;
    }
    return out;
  }

 private:
  const ScriptGraph& g_;
  std::map<std::pair<std::size_t, std::string>, std::vector<std::size_t>> incoming_;
};

}  // namespace

std::vector<ActionUrl> extract_action_urls(const ScriptGraph& g) {
  const UrlFolder folder(g);
  std::vector<ActionUrl> out;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (!is_url_action(g.nodes[i].kind)) continue;
    for (std::size_t e : folder.incoming(i, "url")) {
      const GraphEdge& edge = g.edges[e];
      auto value = folder.fold(edge.from, edge.from_port);
      out.push_back({i, value ? std::move(*value) : std::string(kDynamicUrl)});
    }
  }
  return out;
}

std::vector<std::string> extract_urls(const ScriptGraph& g) {
  std::vector<std::string> out;
  for (auto& a : extract_action_urls(g)) {
    if (std::find(out.begin(), out.end(), a.url) == out.end()) out.push_back(std::move(a.url));
  }
  return out;
}

namespace {

/// Data-flow successors used by the taint analysis, with sink flags.
struct FlowGraph {
  std::vector<std::vector<std::size_t>> next;
  std::vector<std::uint8_t> sink;
  std::vector<std::size_t> sources;

  explicit FlowGraph(const ScriptGraph& g)
      : next(g.nodes.size()), sink(g.nodes.size(), 0) {
    std::map<std::string, std::vector<std::size_t>> readers;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      if (g.nodes[i].kind == NodeKind::VariableRead) readers[g.nodes[i].attrs.at("name")].push_back(i);
    }
    std::vector<std::uint8_t> has_payload(g.nodes.size(), 0);
    for (const auto& e : g.edges) {
      const NodeKind from = g.nodes[e.from].kind;
      const NodeKind to = g.nodes[e.to].kind;
      if (e.from_port != data_output(from)) continue;
      const bool propagates = (to == NodeKind::Concat && (e.to_port == "a" || e.to_port == "b")) ||
                              (to == NodeKind::SetVariable && e.to_port == "value");
      if (is_sink_port(to, e.to_port)) {
        sink[e.to] = 1;
        next[e.from].push_back(e.to);
      } else if (propagates) {
        next[e.from].push_back(e.to);
      }
      if (category_of(from) == NodeCategory::Event) has_payload[e.from] = 1;
    }
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      if (g.nodes[i].kind == NodeKind::SetVariable) {
        auto it = readers.find(g.nodes[i].attrs.at("name"));
        if (it != readers.end()) next[i].insert(next[i].end(), it->second.begin(), it->second.end());
      }
      if (has_payload[i]) sources.push_back(i);
    }
    for (auto& n : next) {
      std::sort(n.begin(), n.end());
      n.erase(std::unique(n.begin(), n.end()), n.end());
    }
  }
};

TaintPath cap_path(TaintPath path) {
  if (path.size() <= kMaxTaintPathNodes) return path;
  TaintPath out(path.begin(), path.begin() + 32);
  out.push_back("...");
  out.insert(out.end(), path.end() - static_cast<std::ptrdiff_t>(kMaxTaintPathNodes - 33),
             path.end());
  return out;
}

}  // namespace

TaintResult analyze_taint(const ScriptGraph& g) {
  const FlowGraph flow(g);
  TaintResult result;

  // Fixed point over the tainted-node set, seeded with every source.
  std::vector<std::uint8_t> tainted(g.nodes.size(), 0);
  std::deque<std::size_t> work;
  for (std::size_t s : flow.sources) {
    tainted[s] = 1;
    work.push_back(s);
  }
  bool any_sink = false;
  while (!work.empty()) {
    const std::size_t u = work.front();
    work.pop_front();
    ++result.iterations;
    if (flow.sink[u]) any_sink = true;
    if (flow.sink[u]) continue;  // sinks do not forward
    for (std::size_t v : flow.next[u]) {
      if (!tainted[v]) {
        tainted[v] = 1;
        work.push_back(v);
      }
    }
  }
  if (!any_sink) return result;

  // One shortest witness per (source, sink) pair.
  for (std::size_t s : flow.sources) {
    std::vector<std::ptrdiff_t> pred(g.nodes.size(), -2);
    std::deque<std::size_t> q{s};
    pred[s] = -1;
    std::vector<std::size_t> sinks;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop_front();
      if (flow.sink[u]) {
        sinks.push_back(u);
        continue;
      }
      for (std::size_t v : flow.next[u]) {
        if (pred[v] == -2) {
          pred[v] = static_cast<std::ptrdiff_t>(u);
          q.push_back(v);
        }
      }
    }
    std::sort(sinks.begin(), sinks.end());
    for (std::size_t t : sinks) {
      TaintPath path;
      for (auto cur = static_cast<std::ptrdiff_t>(t); cur >= 0; cur = pred[cur]) {
        path.push_back(g.nodes[cur].id);
      }
      std::reverse(path.begin(), path.end());
      result.paths.push_back(cap_path(std::move(path)));
    }
  }
  return result;
}

std::vector<TaintPath> taint_reachability(const ScriptGraph& g) { return analyze_taint(g).paths; }

ScriptVerdict classify_script(const ScriptGraph& g, const UrlPolicy& url_policy) {
  ScriptVerdict v;
  v.urls = extract_urls(g);
  v.taint_paths = taint_reachability(g);
  if (!v.taint_paths.empty()) {
    v.verdict = VerdictClass::Exfiltrator;
    return v;
  }
  // Forward reachability from entry events over every edge.
  std::vector<std::vector<std::size_t>> out(g.nodes.size());
  for (const auto& e : g.edges) out[e.from].push_back(e.to);
  std::vector<std::uint8_t> reached(g.nodes.size(), 0);
  std::deque<std::size_t> q(g.events.begin(), g.events.end());
  for (std::size_t e : g.events) reached[e] = 1;
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop_front();
    for (std::size_t w : out[u]) {
      if (!reached[w]) {
        reached[w] = 1;
        q.push_back(w);
      }
    }
  }
  for (const auto& a : extract_action_urls(g)) {
    const NodeKind k = g.nodes[a.action].kind;
    if (!reached[a.action] || (k != NodeKind::OpenURL && k != NodeKind::PlayVideo)) continue;
    if (evaluate_url(a.url, url_policy).flagged()) {
      v.verdict = VerdictClass::Redirector;
      break;
    }
  }
  return v;
}

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string describe(const UrlEvaluation& ev) {
  std::string out = std::string(to_string(ev.verdict));
  if (!ev.reasons.empty()) {
    out += " (";
    for (std::size_t i = 0; i < ev.reasons.size(); ++i) {
      if (i) out += ",";
      out += to_string(ev.reasons[i]);
    }
    out += ")";
  }
  return out;
}

}  // namespace

ScriptScanResult scan_scripts(const WorldPackage& pkg, const RuleSet& ruleset, unsigned jobs) {
  std::vector<const std::pair<const std::string, std::string>*> entries;
  for (const auto& entry : pkg.scripts) entries.push_back(&entry);

  struct PerScript {
    ScriptVerdict verdict;
    std::vector<UrlEvaluation> flagged;
  };
  std::vector<PerScript> results(entries.size());
  parallel_for(entries.size(), jobs, [&](std::size_t i) {
    const auto& [id, text] = *entries[i];
    const ScriptGraph g = parse_script(text, "scripts/" + id + ".json");
    results[i].verdict = classify_script(g, ruleset.url_policy());
    for (const auto& url : results[i].verdict.urls) {
      auto ev = evaluate_url(url, ruleset.url_policy());
      if (ev.flagged()) results[i].flagged.push_back(std::move(ev));
    }
  });

  ScriptScanResult out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string& id = entries[i]->first;
    const PerScript& r = results[i];
    if (!r.flagged.empty() && ruleset.enabled(RuleId::SCR_1)) {
      Finding f;
      f.rule_id = RuleId::SCR_1;
      f.severity = ruleset.severity(RuleId::SCR_1);
      f.subjects = {id};
      for (std::size_t k = 0; k < r.flagged.size(); ++k) {
        f.evidence["url." + std::to_string(k)] = r.flagged[k].url + " " + describe(r.flagged[k]);
      }
      f.evidence["verdict"] = std::string(to_string(r.verdict.verdict));
      f.message = "script '" + id + "' references " + std::to_string(r.flagged.size()) +
                  " blocked or suspicious URL(s)";
      out.findings.push_back(std::move(f));
    }
    if (r.verdict.verdict == VerdictClass::Exfiltrator && ruleset.enabled(RuleId::SCR_2)) {
      Finding f;
      f.rule_id = RuleId::SCR_2;
      f.severity = ruleset.severity(RuleId::SCR_2);
      f.subjects = {id};
      for (std::size_t k = 0; k < r.verdict.taint_paths.size(); ++k) {
        f.evidence["taint_path." + std::to_string(k)] = join(r.verdict.taint_paths[k], " -> ");
      }
      f.message = "script '" + id + "' forwards user input to a network or persistence sink";
      out.findings.push_back(std::move(f));
    }
    out.verdicts.emplace(id, r.verdict);
  }
  return out;
}

}  // namespace metascanner
