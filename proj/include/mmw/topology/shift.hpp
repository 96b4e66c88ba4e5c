#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/cost/editlog.hpp"
#include "mmw/topology/topology.hpp"

namespace mmw {

// ---------------------------------------------------------------------------
// Architecture inference: the cost class of a topology's components depends
// on which of the three compared architectures it instantiates.
//   - any mask present                -> MMW (mediators are Me')
//   - any mediator-over-mediator edge -> 2LMW (mediators are Me)
//   - otherwise                       -> 1LMW (mediators are Me)
// ---------------------------------------------------------------------------

enum class ArchStyle { OneLMW, TwoLMW, MMW };

inline ArchStyle infer_arch_style(const Topology& t) {
  for (const auto& c : t.components)
    if (c.kind == NodeKind::Mask) return ArchStyle::MMW;
  for (const auto& e : t.edges) {
    const ComponentDecl* from = t.find_component(e.from);
    const ComponentDecl* to = t.find_component(e.to);
    if (from && to && from->kind == NodeKind::Mediator && to->kind == NodeKind::Mediator)
      return ArchStyle::TwoLMW;
  }
  return ArchStyle::OneLMW;
}

// ---------------------------------------------------------------------------
// Shifts: the four evolution scenarios of §4.3 as topology edits.
// ---------------------------------------------------------------------------

enum class ShiftKind {
  AddRepresentationType,  // Scenario 1: representation of a new type
  AddRepresentation,      // Scenario 2: new representation of an existing type
  AddMediation,           // Scenario 3: new mediation functionality
  AddWrapper,             // Scenario 4: new data source
};

inline const char* to_string(ShiftKind k) {
  switch (k) {
    case ShiftKind::AddRepresentationType: return "add-representation-type";
    case ShiftKind::AddRepresentation: return "add-representation";
    case ShiftKind::AddMediation: return "add-mediation";
    case ShiftKind::AddWrapper: return "add-wrapper";
  }
  return "?";
}

inline std::optional<ShiftKind> parse_shift_kind(const std::string& s) {
  if (s == "add-representation-type") return ShiftKind::AddRepresentationType;
  if (s == "add-representation") return ShiftKind::AddRepresentation;
  if (s == "add-mediation") return ShiftKind::AddMediation;
  if (s == "add-wrapper") return ShiftKind::AddWrapper;
  return std::nullopt;
}

struct ShiftSpec {
  ShiftKind kind = ShiftKind::AddWrapper;
  // Component the new one attaches to. Scenarios 1/2 on 2LMW/MMW and
  // scenario 4 need a mediator target; 1LMW scenarios 1/2 attach to all
  // wrappers and ignore it.
  std::string target;
  // Scenario 3: wrapper ids the new mediation spans (default: all wrappers).
  std::vector<std::string> over;
  std::string new_id;             // optional; synthesized when empty
  std::string source_id;          // scenario 4: id of the new source
  nlohmann::json config;          // optional config for the new component
};

struct ShiftResult {
  Topology topology;
  EditLog log;
};

namespace detail {

inline std::string fresh_id(const Topology& t, const std::string& want) {
  auto taken = [&](const std::string& id) {
    return t.find_component(id) != nullptr || t.find_source(id) != nullptr;
  };
  if (!taken(want)) return want;
  for (int i = 2;; ++i) {
    std::string candidate = want + "_" + std::to_string(i);
    if (!taken(candidate)) return candidate;
  }
}

inline const ComponentDecl& require_mediator(const Topology& t, const std::string& id,
                                             const char* why) {
  const ComponentDecl* c = t.find_component(id);
  if (!c)
    throw Error("invalid-shift-target",
                std::string(why) + ": no component '" + id + "' in the topology");
  if (c->kind != NodeKind::Mediator)
    throw Error("invalid-shift-target",
                std::string(why) + ": '" + id + "' is a " + to_string(c->kind) +
                    ", expected a mediator");
  return *c;
}

inline std::vector<std::string> all_wrapper_ids(const Topology& t) {
  std::vector<std::string> out;
  for (const auto& c : t.components)
    if (c.kind == NodeKind::Wrapper) out.push_back(c.id);
  return out;
}

// Registers the new child in an existing mediator's integration config so a
// shifted topology stays launchable, not just valid.
inline void register_child(Topology& t, const std::string& mediator_id,
                           const std::string& child_id) {
  for (auto& c : t.components) {
    if (c.id != mediator_id) continue;
    if (!c.config.contains("children")) c.config["children"] = nlohmann::json::array();
    c.config["children"].push_back({{"id", child_id}, {"alias", child_id}});
  }
}

inline nlohmann::json mediator_config(const std::vector<std::string>& children) {
  nlohmann::json kids = nlohmann::json::array();
  for (const auto& id : children) kids.push_back({{"id", id}, {"alias", id}});
  return {{"children", kids}};
}

}  // namespace detail

// Applies a shift, returning the edited topology plus the EditLog of every
// implement/deploy/connect action. The log prices to the Table 1 closed form
// for the inferred architecture.
inline ShiftResult apply_shift(const Topology& base, const ShiftSpec& spec) {
  ShiftResult r;
  r.topology = base;
  Topology& t = r.topology;
  EditLog& log = r.log;
  ArchStyle arch = infer_arch_style(base);
  CompClass mediator_class =
      arch == ArchStyle::MMW ? CompClass::MediatorPlain : CompClass::MediatorRepr;

  switch (spec.kind) {
    case ShiftKind::AddRepresentationType:
    case ShiftKind::AddRepresentation: {
      bool new_type = spec.kind == ShiftKind::AddRepresentationType;
      if (arch == ArchStyle::MMW) {
        // The new representation is a mask on one mediator.
        detail::require_mediator(base, spec.target, "mask downstream");
        std::string id = detail::fresh_id(t, spec.new_id.empty() ? "new_mask" : spec.new_id);
        nlohmann::json config = spec.config.is_object() && !spec.config.empty()
                                    ? spec.config
                                    : nlohmann::json{{"kind", "tabular"}};
        t.components.push_back({id, NodeKind::Mask, config});
        if (new_type) log.implement(CompClass::Mask, id, "new representation type");
        log.deploy(CompClass::Mask, id);
        t.edges.push_back({id, spec.target});
        log.connect(CompClass::Mask, id, "to " + spec.target);
      } else if (arch == ArchStyle::TwoLMW) {
        // The new representation is an upper-layer mediator over one lower
        // mediator.
        detail::require_mediator(base, spec.target, "upper mediator downstream");
        std::string id = detail::fresh_id(t, spec.new_id.empty() ? "new_upper_me" : spec.new_id);
        t.components.push_back(
            {id, NodeKind::Mediator, detail::mediator_config({spec.target})});
        if (new_type) log.implement(CompClass::MediatorRepr, id, "new representation type");
        log.deploy(CompClass::MediatorRepr, id);
        t.edges.push_back({id, spec.target});
        log.connect(CompClass::MediatorRepr, id, "to " + spec.target);
      } else {
        // 1LMW: a monolithic mediator replicating the mediation over all N
        // wrappers just to change the representation.
        std::vector<std::string> wrappers = detail::all_wrapper_ids(base);
        if (wrappers.empty())
          throw Error("invalid-shift-target", "topology has no wrappers to mediate over");
        std::string id = detail::fresh_id(t, spec.new_id.empty() ? "new_me" : spec.new_id);
        t.components.push_back({id, NodeKind::Mediator, detail::mediator_config(wrappers)});
        if (new_type) log.implement(CompClass::MediatorRepr, id, "new representation type");
        log.deploy(CompClass::MediatorRepr, id);
        for (const auto& w : wrappers) {
          t.edges.push_back({id, w});
          log.connect(CompClass::MediatorRepr, id, "to " + w);
        }
      }
      break;
    }

    case ShiftKind::AddMediation: {
      std::vector<std::string> over =
          spec.over.empty() ? detail::all_wrapper_ids(base) : spec.over;
      if (over.empty())
        throw Error("invalid-shift-target", "topology has no wrappers to mediate over");
      for (const auto& w : over) {
        const ComponentDecl* c = base.find_component(w);
        if (!c || c->kind == NodeKind::Mask)
          throw Error("invalid-shift-target",
                      "mediation target '" + w + "' is not a wrapper or mediator");
      }
      std::string me_id = detail::fresh_id(t, spec.new_id.empty() ? "new_me" : spec.new_id);
      t.components.push_back({me_id, NodeKind::Mediator, detail::mediator_config(over)});
      log.deploy(mediator_class, me_id, "new mediation functionality");
      for (const auto& w : over) {
        t.edges.push_back({me_id, w});
        log.connect(mediator_class, me_id, "to " + w);
      }
      if (arch == ArchStyle::TwoLMW) {
        // The represented layer needs its own upper mediator over the new one.
        std::string up_id = detail::fresh_id(t, me_id + "_upper");
        t.components.push_back({up_id, NodeKind::Mediator, detail::mediator_config({me_id})});
        log.deploy(CompClass::MediatorRepr, up_id, "upper representation layer");
        t.edges.push_back({up_id, me_id});
        log.connect(CompClass::MediatorRepr, up_id, "to " + me_id);
      } else if (arch == ArchStyle::MMW) {
        // RMa3 keeps the new mediator representation-free; an existing mask
        // implementation is deployed on top of it.
        std::string mask_id = detail::fresh_id(t, me_id + "_mask");
        t.components.push_back({mask_id, NodeKind::Mask, {{"kind", "tabular"}}});
        log.deploy(CompClass::Mask, mask_id, "mask over the new mediation");
        t.edges.push_back({mask_id, me_id});
        log.connect(CompClass::Mask, mask_id, "to " + me_id);
      }
      break;
    }

    case ShiftKind::AddWrapper: {
      detail::require_mediator(base, spec.target, "wrapper upstream");
      std::string w_id = detail::fresh_id(t, spec.new_id.empty() ? "new_wrapper" : spec.new_id);
      std::string s_id = detail::fresh_id(t, spec.source_id.empty() ? w_id + "_src" : spec.source_id);
      nlohmann::json source_config = spec.config.is_object() && !spec.config.empty()
                                         ? spec.config
                                         : nlohmann::json{{"kind", "mem"}};
      t.sources.push_back({s_id, source_config});
      t.components.push_back({w_id, NodeKind::Wrapper, nlohmann::json::object()});
      // Encapsulating the source is part of the wrapper deployment, not a
      // priced connection; only the mediator link costs C_Conn_set.
      t.edges.push_back({w_id, s_id});
      log.deploy(CompClass::Wrapper, w_id, "wrapping " + s_id);
      t.edges.push_back({spec.target, w_id});
      log.connect(CompClass::Wrapper, w_id, "from " + spec.target);
      detail::register_child(t, spec.target, w_id);
      break;
    }
  }

  // Shift closure: the scenarios never break the architecture rules.
  std::vector<TopologyViolation> report = validate_topology(t);
  if (!report.empty())
    throw Error("invalid-shift-target",
                "shift result fails validation: " + report[0].rule + ": " + report[0].detail);
  return r;
}

}  // namespace mmw
