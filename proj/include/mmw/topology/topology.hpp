#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmw/core/error.hpp"

namespace mmw {

// ---------------------------------------------------------------------------
// Declarative topology: sources, components (wrapper/mediator/mask), and
// directed upper->lower edges. Wrapper->source association is an edge too.
// ---------------------------------------------------------------------------

enum class NodeKind { Wrapper, Mediator, Mask };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Wrapper: return "wrapper";
    case NodeKind::Mediator: return "mediator";
    case NodeKind::Mask: return "mask";
  }
  return "?";
}

struct SourceDecl {
  std::string id;
  nlohmann::json config;  // adapter config: {"kind": csv|jsonl|mem, ...}
};

struct ComponentDecl {
  std::string id;
  NodeKind kind = NodeKind::Wrapper;
  nlohmann::json config;
};

struct TopologyEdge {
  std::string from;  // upper
  std::string to;    // lower
};

struct Topology {
  std::vector<SourceDecl> sources;
  std::vector<ComponentDecl> components;
  std::vector<TopologyEdge> edges;

  const ComponentDecl* find_component(const std::string& id) const {
    for (const auto& c : components)
      if (c.id == id) return &c;
    return nullptr;
  }
  const SourceDecl* find_source(const std::string& id) const {
    for (const auto& s : sources)
      if (s.id == id) return &s;
    return nullptr;
  }
  std::vector<std::string> children_of(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& e : edges)
      if (e.from == id) out.push_back(e.to);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Parsing: structural only; rule checks live in validate_topology.
// ---------------------------------------------------------------------------

inline Topology parse_topology(const nlohmann::json& doc) {
  auto fail = [](const std::string& path, const std::string& what) -> void {
    throw Error("parse-error", path + ": " + what);
  };
  if (!doc.is_object()) fail("$", "topology document must be a JSON object");
  for (const char* key : {"sources", "components", "edges"}) {
    if (!doc.contains(key)) fail("$", std::string("missing required key '") + key + "'");
    if (!doc[key].is_array()) fail("$." + std::string(key), "must be an array");
  }

  Topology t;
  std::size_t i = 0;
  for (const auto& s : doc["sources"]) {
    std::string path = "$.sources[" + std::to_string(i++) + "]";
    if (!s.is_object() || !s.contains("id") || !s["id"].is_string())
      fail(path, "needs a string 'id'");
    t.sources.push_back({s["id"].get<std::string>(), s.value("config", nlohmann::json::object())});
  }
  i = 0;
  for (const auto& c : doc["components"]) {
    std::string path = "$.components[" + std::to_string(i++) + "]";
    if (!c.is_object() || !c.contains("id") || !c["id"].is_string())
      fail(path, "needs a string 'id'");
    if (!c.contains("kind") || !c["kind"].is_string()) fail(path, "needs a string 'kind'");
    std::string kind = c["kind"].get<std::string>();
    ComponentDecl decl;
    decl.id = c["id"].get<std::string>();
    decl.config = c.value("config", nlohmann::json::object());
    if (kind == "wrapper")
      decl.kind = NodeKind::Wrapper;
    else if (kind == "mediator")
      decl.kind = NodeKind::Mediator;
    else if (kind == "mask")
      decl.kind = NodeKind::Mask;
    else
      fail(path + ".kind", "unknown component kind '" + kind + "'");
    t.components.push_back(std::move(decl));
  }
  i = 0;
  for (const auto& e : doc["edges"]) {
    std::string path = "$.edges[" + std::to_string(i++) + "]";
    if (!e.is_object() || !e.contains("from") || !e.contains("to") || !e["from"].is_string() ||
        !e["to"].is_string())
      fail(path, "needs string 'from' and 'to'");
    t.edges.push_back({e["from"].get<std::string>(), e["to"].get<std::string>()});
  }
  return t;
}

inline Topology parse_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("parse-error", path + ": cannot open file");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse-error", path + ": " + e.what());
  }
  Topology t = parse_topology(doc);
  // Relative adapter paths resolve against the topology file's directory, so
  // fixtures work from any working directory.
  std::filesystem::path base = std::filesystem::absolute(path).parent_path();
  for (auto& s : t.sources) {
    if (!s.config.contains("path")) continue;
    std::filesystem::path p = s.config["path"].get<std::string>();
    if (p.is_relative()) s.config["path"] = (base / p).string();
  }
  return t;
}

inline nlohmann::json topology_to_json(const Topology& t) {
  nlohmann::json doc{{"sources", nlohmann::json::array()},
                     {"components", nlohmann::json::array()},
                     {"edges", nlohmann::json::array()}};
  for (const auto& s : t.sources) doc["sources"].push_back({{"id", s.id}, {"config", s.config}});
  for (const auto& c : t.components)
    doc["components"].push_back(
        {{"id", c.id}, {"kind", to_string(c.kind)}, {"config", c.config}});
  for (const auto& e : t.edges) doc["edges"].push_back({{"from", e.from}, {"to", e.to}});
  return doc;
}

// ---------------------------------------------------------------------------
// Rule validation. Violations are data; each names the rule it breaks.
// ---------------------------------------------------------------------------

struct TopologyViolation {
  std::string rule;  // e.g. "RMa2", "F1-advisory", "layering"
  std::string detail;
};

inline std::vector<TopologyViolation> validate_topology(const Topology& t) {
  std::vector<TopologyViolation> out;
  auto flag = [&](const std::string& rule, const std::string& detail) {
    out.push_back({rule, detail});
  };

  std::set<std::string> ids;
  for (const auto& s : t.sources)
    if (!ids.insert(s.id).second) flag("duplicate-id", "id '" + s.id + "' declared twice");
  for (const auto& c : t.components)
    if (!ids.insert(c.id).second) flag("duplicate-id", "id '" + c.id + "' declared twice");

  std::map<std::string, int> incoming;  // component edges only
  std::map<std::string, std::vector<std::string>> outgoing;
  for (const auto& e : t.edges) {
    const ComponentDecl* from = t.find_component(e.from);
    bool to_known = t.find_component(e.to) || t.find_source(e.to);
    if (!from)
      flag("unknown-edge-endpoint", "edge from unknown component '" + e.from + "'");
    if (!to_known) flag("unknown-edge-endpoint", "edge to unknown id '" + e.to + "'");
    if (!from || !to_known) continue;
    outgoing[e.from].push_back(e.to);
    if (t.find_component(e.to)) incoming[e.to]++;
  }

  std::map<std::string, int> wrappers_per_source;
  for (const auto& c : t.components) {
    const auto& down = outgoing[c.id];
    switch (c.kind) {
      case NodeKind::Mask: {
        // RMa1: masks sit at the top of the hierarchy.
        if (incoming[c.id] > 0)
          flag("RMa1", "mask '" + c.id + "' has incoming component connections");
        // RMa2: exactly one downstream.
        if (down.size() != 1) {
          flag("RMa2", "mask '" + c.id + "' has " + std::to_string(down.size()) +
                           " downstream connections, expected exactly 1");
          break;
        }
        const ComponentDecl* peer = t.find_component(down[0]);
        if (!peer || peer->kind == NodeKind::Mask) {
          flag("layering", "mask '" + c.id + "' must connect to a mediator or wrapper");
        } else if (peer->kind == NodeKind::Wrapper &&
                   !c.config.value("allow_wrapper_downstream", false)) {
          // F1: feasible but inadvisable without an explicit opt-in.
          flag("F1-advisory",
               "mask '" + c.id + "' connects directly to wrapper '" + peer->id + "'");
        }
        break;
      }
      case NodeKind::Mediator: {
        if (down.empty())
          flag("mediator-children", "mediator '" + c.id + "' integrates no children");
        for (const auto& child : down) {
          const ComponentDecl* peer = t.find_component(child);
          if (!peer)
            flag("layering", "mediator '" + c.id + "' connects to source '" + child +
                                 "' without a wrapper");
          else if (peer->kind == NodeKind::Mask)
            flag("layering", "mediator '" + c.id + "' connects upward to mask '" + child + "'");
        }
        break;
      }
      case NodeKind::Wrapper: {
        // RW1: a wrapper encapsulates exactly one source and nothing else.
        int source_edges = 0;
        for (const auto& child : down) {
          if (t.find_source(child)) {
            ++source_edges;
            wrappers_per_source[child]++;
          } else {
            flag("RW1", "wrapper '" + c.id + "' connects to component '" + child + "'");
          }
        }
        if (source_edges != 1)
          flag("RW1", "wrapper '" + c.id + "' has " + std::to_string(source_edges) +
                          " sources, expected exactly 1");
        break;
      }
    }
  }
  for (const auto& s : t.sources) {
    int n = wrappers_per_source[s.id];
    if (n != 1)
      flag("one-wrapper-per-source",
           "source '" + s.id + "' has " + std::to_string(n) + " wrappers, expected exactly 1");
  }

  // Acyclicity over component edges (DFS, three colors).
  std::map<std::string, int> color;  // 0 white, 1 grey, 2 black
  bool cycle = false;
  std::function<void(const std::string&)> dfs = [&](const std::string& id) {
    color[id] = 1;
    for (const auto& next : outgoing[id]) {
      if (!t.find_component(next)) continue;
      if (color[next] == 1) cycle = true;
      if (color[next] == 0 && !cycle) dfs(next);
    }
    color[id] = 2;
  };
  for (const auto& c : t.components)
    if (color[c.id] == 0 && !cycle) dfs(c.id);
  if (cycle) flag("acyclic", "component connection graph contains a cycle");

  return out;
}

}  // namespace mmw
