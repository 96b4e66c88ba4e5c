#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mmw {

// Cost classes of the evolution model: mask, mediator with representational
// functionality, mediator without, wrapper.
enum class CompClass { Mask, MediatorRepr, MediatorPlain, Wrapper };

inline const char* to_string(CompClass c) {
  switch (c) {
    case CompClass::Mask: return "Ma";
    case CompClass::MediatorRepr: return "Me";
    case CompClass::MediatorPlain: return "Me'";
    case CompClass::Wrapper: return "W";
  }
  return "?";
}

inline std::optional<CompClass> parse_comp_class(const std::string& s) {
  if (s == "Ma") return CompClass::Mask;
  if (s == "Me") return CompClass::MediatorRepr;
  if (s == "Me'") return CompClass::MediatorPlain;
  if (s == "W") return CompClass::Wrapper;
  return std::nullopt;
}

// One implement/deploy/connect action performed by a shift.
struct EditAction {
  enum class Act { Implement, Deploy, Connect };

  Act act = Act::Deploy;
  CompClass comp = CompClass::Wrapper;  // Connect: class of the upper endpoint
  std::string component_id;
  std::string detail;
};

inline const char* to_string(EditAction::Act a) {
  switch (a) {
    case EditAction::Act::Implement: return "implement";
    case EditAction::Act::Deploy: return "deploy";
    case EditAction::Act::Connect: return "connect";
  }
  return "?";
}

struct EditLog {
  std::vector<EditAction> actions;

  void implement(CompClass c, std::string id, std::string detail = "") {
    actions.push_back({EditAction::Act::Implement, c, std::move(id), std::move(detail)});
  }
  void deploy(CompClass c, std::string id, std::string detail = "") {
    actions.push_back({EditAction::Act::Deploy, c, std::move(id), std::move(detail)});
  }
  void connect(CompClass c, std::string id, std::string detail = "") {
    actions.push_back({EditAction::Act::Connect, c, std::move(id), std::move(detail)});
  }
};

}  // namespace mmw
