#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metascanner/finding.hpp"
#include "metascanner/policy.hpp"
#include "metascanner/world_model.hpp"

namespace metascanner {

inline constexpr std::size_t kMaxScriptNodes = 4096;
inline constexpr std::size_t kMaxTaintPathNodes = 64;
inline constexpr std::string_view kDynamicUrl = "<dynamic>";

enum class NodeKind {
  // events
  OnInteract,
  OnKeyPress,
  // actions
  OpenURL,
  SendWebRequest,
  PlayVideo,
  SetVariable,
  SetPersistent,
  Log,
  PlaySound,
  // data
  StringConst,
  Concat,
  VariableRead,
};

enum class NodeCategory { Event, Action, Data };

NodeCategory category_of(NodeKind kind);
std::string_view to_string(NodeKind kind);

struct GraphNode {
  std::string id;
  NodeKind kind = NodeKind::OnInteract;
  std::map<std::string, std::string> attrs;
  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

/// Edges are indices into ScriptGraph::nodes plus port names.
struct GraphEdge {
  std::size_t from = 0;
  std::string from_port;
  std::size_t to = 0;
  std::string to_port;
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct ScriptGraph {
  std::string id;
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::vector<std::size_t> events;  // entry event node indices

  friend bool operator==(const ScriptGraph&, const ScriptGraph&) = default;
};

/// Port vocabulary. Events emit "exec" and "payload"; actions take "exec"
/// and emit "exec"; data inputs are named per kind (OpenURL.url,
/// SendWebRequest.url/data, PlayVideo.url, SetVariable.value,
/// SetPersistent.data, Log.message, Concat.a/b); data nodes emit "value".
bool is_output_port(NodeKind kind, std::string_view port);
bool is_input_port(NodeKind kind, std::string_view port);

/// Throws ParseError (malformed JSON or schema types) or ValidationError
/// (dangling node/port references, attribute mismatch, size bound).
ScriptGraph parse_script(std::string_view document, std::string_view file = "script");

/// A URL value reaching an action's "url" port.
struct ActionUrl {
  std::size_t action = 0;  // node index
  std::string url;         // folded constant or kDynamicUrl
};

std::vector<ActionUrl> extract_action_urls(const ScriptGraph& g);

/// Distinct URL strings from extract_action_urls, first-seen order.
std::vector<std::string> extract_urls(const ScriptGraph& g);

/// Node-id path from an event node to a sink node.
using TaintPath = std::vector<std::string>;

struct TaintResult {
  std::vector<TaintPath> paths;
  std::size_t iterations = 0;  // worklist steps taken by the fixed point
};

/// Source: an event's payload port. Sinks: SendWebRequest.data and
/// SetPersistent.data. Flow passes through Concat, SetVariable and
/// VariableRead (variables matched by name, flow-insensitively). One
/// shortest witness path per reachable (source, sink) pair.
TaintResult analyze_taint(const ScriptGraph& g);
std::vector<TaintPath> taint_reachability(const ScriptGraph& g);

enum class VerdictClass { Benign, Redirector, Exfiltrator };
std::string_view to_string(VerdictClass v);

struct ScriptVerdict {
  VerdictClass verdict = VerdictClass::Benign;
  std::vector<std::string> urls;
  std::vector<TaintPath> taint_paths;
  friend bool operator==(const ScriptVerdict&, const ScriptVerdict&) = default;
};

ScriptVerdict classify_script(const ScriptGraph& g, const UrlPolicy& url_policy);

struct ScriptScanResult {
  std::map<std::string, ScriptVerdict> verdicts;
  std::vector<Finding> findings;
};

/// Parses and classifies every script in the package. Emits SCR-1 for
/// scripts with Blocked/Suspicious URLs and SCR-2 for exfiltrators.
/// Parse errors propagate.
ScriptScanResult scan_scripts(const WorldPackage& pkg, const RuleSet& ruleset, unsigned jobs = 1);

}  // namespace metascanner
