#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "mmw/core/json_codec.hpp"
#include "mmw/mask/http_app.hpp"
#include "mmw/mask/http_kind.hpp"
#include "mmw/mask/mask.hpp"
#include "mmw/mask/tabular_kind.hpp"
#include "mmw/mediator/mediator.hpp"
#include "mmw/topology/topology.hpp"
#include "mmw/wrapper/wrapper.hpp"

namespace mmw {

namespace detail {

inline IntegrationSpec integration_spec_of(const Topology& t, const ComponentDecl& c) {
  IntegrationSpec spec;
  if (c.config.contains("children")) {
    for (const auto& child : c.config["children"])
      spec.children.emplace_back(child.at("id").get<std::string>(),
                                 child.value("alias", child.at("id").get<std::string>()));
  } else {
    for (const auto& child : t.children_of(c.id)) spec.children.emplace_back(child, child);
  }
  if (c.config.contains("mapping")) spec.mapping = mapping_from_json(c.config["mapping"]);
  return spec;
}

struct MaskTranslators {
  std::shared_ptr<SchemaTranslator> schema;
  std::shared_ptr<QueryTranslator> query;
  std::shared_ptr<ResultTranslator> result;
};

inline MaskTranslators make_translators(const nlohmann::json& config) {
  std::string kind = config.value("kind", std::string(kTabularMaskKind));
  if (kind == kHttpMaskKind)
    return {std::make_shared<HttpSchemaTranslator>(), std::make_shared<HttpQueryTranslator>(),
            std::make_shared<HttpResultTranslator>()};
  if (kind == kTabularMaskKind) {
    auto format = config.value("format", std::string("table")) == "csv"
                      ? TabularResultTranslator::Format::Csv
                      : TabularResultTranslator::Format::Table;
    return {std::make_shared<TabularSchemaTranslator>(),
            std::make_shared<TabularQueryTranslator>(),
            std::make_shared<TabularResultTranslator>(format)};
  }
  throw Error("unknown-mask-kind", "no translators for mask kind '" + kind + "'");
}

inline std::unique_ptr<MaskModule> make_mask(const ComponentDecl& c) {
  SchemaMapping mapping;
  if (c.config.contains("mapping")) mapping = mapping_from_json(c.config["mapping"]);
  MaskTranslators tr = make_translators(c.config);
  MaskOptions options;
  options.allow_wrapper_downstream = c.config.value("allow_wrapper_downstream", false);
  if (c.config.contains("refresh_interval"))
    options.refresh_interval = std::chrono::seconds(c.config["refresh_interval"].get<int>());
  return std::make_unique<MaskModule>(c.id, std::move(mapping), tr.schema, tr.query, tr.result,
                                      options);
}

// Bottom-up build order: wrappers, then mediators children-first, then masks.
inline std::vector<const ComponentDecl*> build_order(const Topology& t) {
  std::vector<const ComponentDecl*> order;
  std::set<std::string> placed;
  for (const auto& c : t.components)
    if (c.kind == NodeKind::Wrapper) {
      order.push_back(&c);
      placed.insert(c.id);
    }
  for (bool progress = true; progress;) {
    progress = false;
    for (const auto& c : t.components) {
      if (c.kind != NodeKind::Mediator || placed.count(c.id)) continue;
      bool ready = true;
      for (const auto& child : t.children_of(c.id))
        if (!placed.count(child)) ready = false;
      if (ready) {
        order.push_back(&c);
        placed.insert(c.id);
        progress = true;
      }
    }
  }
  for (const auto& c : t.components) {
    if (c.kind == NodeKind::Mask) {
      order.push_back(&c);
    } else if (!placed.count(c.id)) {
      throw Error("component-start-failure",
                  "mediator '" + c.id + "' is unreachable in the build order");
    }
  }
  return order;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// In-process launch: every component lives in this process, connected over
// the in-process transport. The handle exposes masks for facade access and
// shuts the system down in reverse start order.
// ---------------------------------------------------------------------------

class InProcSystem {
public:
  InProcSystem() = default;
  InProcSystem(InProcSystem&&) = default;
  InProcSystem& operator=(InProcSystem&&) = default;
  InProcSystem(const InProcSystem&) = delete;
  InProcSystem& operator=(const InProcSystem&) = delete;

  MaskModule& mask(const std::string& id) {
    auto it = masks_.find(id);
    if (it == masks_.end()) throw Error("unknown-component", "no mask '" + id + "'");
    return *it->second;
  }

  std::vector<std::string> mask_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, m] : masks_) out.push_back(id);
    return out;
  }

  // In-process endpoint of a wrapper or mediator, for direct test probes.
  Endpoint endpoint_of(const std::string& id) const {
    auto it = listeners_.find(id);
    if (it == listeners_.end()) throw Error("unknown-component", "no served component '" + id + "'");
    return Endpoint::in_process(it->second);
  }

  void shutdown() {
    masks_.clear();    // stop refresh threads and close upstream links first
    servers_.clear();  // then stop accept loops
    for (auto& [id, l] : listeners_) l->close();
    services_.clear();
  }

  ~InProcSystem() { shutdown(); }

private:
  friend InProcSystem launch_in_process(const Topology& t);

  // Destruction order is the reverse of declaration: masks, then servers,
  // then services, then listeners.
  std::map<std::string, std::shared_ptr<InProcListener>> listeners_;
  std::map<std::string, std::shared_ptr<ComponentService>> services_;
  std::vector<std::unique_ptr<InProcServer>> servers_;
  std::map<std::string, std::unique_ptr<MaskModule>> masks_;
};

inline InProcSystem launch_in_process(const Topology& t) {
  std::vector<TopologyViolation> report = validate_topology(t);
  if (!report.empty())
    throw Error("invalid-topology", report[0].rule + ": " + report[0].detail);

  InProcSystem sys;
  for (const ComponentDecl* c : detail::build_order(t)) {
    try {
      switch (c->kind) {
        case NodeKind::Wrapper: {
          std::string source_id = t.children_of(c->id).at(0);
          const SourceDecl* source = t.find_source(source_id);
          auto wrapper = std::make_shared<Wrapper>(c->id, make_adapter(source_id, source->config));
          wrapper->derive_lcs();
          auto listener = std::make_shared<InProcListener>();
          sys.servers_.push_back(std::make_unique<InProcServer>(listener, wrapper));
          sys.listeners_[c->id] = std::move(listener);
          sys.services_[c->id] = std::move(wrapper);
          break;
        }
        case NodeKind::Mediator: {
          auto mediator = std::make_shared<Mediator>(c->id, detail::integration_spec_of(t, *c));
          for (const auto& child : t.children_of(c->id))
            mediator->connect_child(child, sys.endpoint_of(child));
          mediator->refresh_schema();
          auto listener = std::make_shared<InProcListener>();
          sys.servers_.push_back(std::make_unique<InProcServer>(listener, mediator));
          sys.listeners_[c->id] = std::move(listener);
          sys.services_[c->id] = std::move(mediator);
          break;
        }
        case NodeKind::Mask: {
          std::unique_ptr<MaskModule> mask = detail::make_mask(*c);
          std::string child = t.children_of(c->id).at(0);
          const ComponentDecl* peer = t.find_component(child);
          mask->attach_checked(sys.endpoint_of(child), peer->kind == NodeKind::Wrapper
                                                           ? ComponentType::Wrapper
                                                           : ComponentType::Mediator);
          mask->load_schema();
          sys.masks_[c->id] = std::move(mask);
          break;
        }
      }
    } catch (const Error& e) {
      // Partial starts roll back via the handle's destructor.
      throw Error("component-start-failure", "'" + c->id + "': [" + e.code() + "] " + e.detail());
    }
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Multi-process launch: each component runs in a spawned `mmwctl
// run-component` process, connected over TCP with deterministic ports
// (base_port + component index).
// ---------------------------------------------------------------------------

inline int component_port(const Topology& t, const std::string& id, int base_port) {
  for (std::size_t i = 0; i < t.components.size(); ++i)
    if (t.components[i].id == id) return base_port + static_cast<int>(i);
  throw Error("unknown-component", "no component '" + id + "' in the topology");
}

class MultiProcSystem {
public:
  MultiProcSystem() = default;
  MultiProcSystem(MultiProcSystem&&) = default;
  MultiProcSystem& operator=(MultiProcSystem&&) = default;

  int port_of(const std::string& id) const {
    auto it = ports_.find(id);
    if (it == ports_.end()) throw Error("unknown-component", "no component '" + id + "'");
    return it->second;
  }

  void shutdown() {
    for (auto it = pids_.rbegin(); it != pids_.rend(); ++it) ::kill(*it, SIGTERM);
    for (pid_t pid : pids_) {
      int status = 0;
      ::waitpid(pid, &status, 0);
    }
    pids_.clear();
  }

  ~MultiProcSystem() { shutdown(); }

private:
  friend MultiProcSystem launch_multi_process(const Topology& t, const std::string& topology_file,
                                              const std::string& exe, int base_port);

  std::vector<pid_t> pids_;
  std::map<std::string, int> ports_;
};

inline MultiProcSystem launch_multi_process(const Topology& t, const std::string& topology_file,
                                            const std::string& exe, int base_port) {
  std::vector<TopologyViolation> report = validate_topology(t);
  if (!report.empty())
    throw Error("invalid-topology", report[0].rule + ": " + report[0].detail);

  MultiProcSystem sys;
  for (const ComponentDecl* c : detail::build_order(t)) {
    sys.ports_[c->id] = component_port(t, c->id, base_port);
    pid_t pid = ::fork();
    if (pid < 0) throw Error("component-start-failure", "fork failed for '" + c->id + "'");
    if (pid == 0) {
      std::string port_arg = std::to_string(base_port);
      ::execl(exe.c_str(), exe.c_str(), "run-component", topology_file.c_str(), c->id.c_str(),
              "--base-port", port_arg.c_str(), static_cast<char*>(nullptr));
      _exit(127);  // exec failed
    }
    sys.pids_.push_back(pid);
  }
  return sys;
}

// Builds and serves a single component of `t`; blocks until SIGTERM/SIGINT.
// Children are reached at their deterministic ports with connection retries,
// so the spawn order does not need to be strictly bottom-up across processes.
inline void run_component(const Topology& t, const std::string& id, int base_port) {
  const ComponentDecl* c = t.find_component(id);
  if (!c) throw Error("unknown-component", "no component '" + id + "' in the topology");

  auto child_endpoint = [&](const std::string& child) {
    return Endpoint::tcp("127.0.0.1", component_port(t, child, base_port));
  };
  auto with_retries = [](const std::function<void()>& fn) {
    for (int attempt = 0;; ++attempt) {
      try {
        fn();
        return;
      } catch (const Error&) {
        if (attempt >= 50) throw;
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
      }
    }
  };
  static volatile std::sig_atomic_t stop_flag;
  stop_flag = 0;
  std::signal(SIGTERM, [](int) { stop_flag = 1; });
  std::signal(SIGINT, [](int) { stop_flag = 1; });
  auto wait_loop = [&] {
    while (!stop_flag) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  };

  switch (c->kind) {
    case NodeKind::Wrapper: {
      std::string source_id = t.children_of(id).at(0);
      const SourceDecl* source = t.find_source(source_id);
      auto wrapper = std::make_shared<Wrapper>(id, make_adapter(source_id, source->config));
      wrapper->derive_lcs();
      auto listener = std::make_shared<TcpListener>(component_port(t, id, base_port), "127.0.0.1");
      TcpServer server(listener, wrapper);
      wait_loop();
      server.stop();
      break;
    }
    case NodeKind::Mediator: {
      auto mediator = std::make_shared<Mediator>(id, detail::integration_spec_of(t, *c));
      for (const auto& child : t.children_of(id))
        with_retries([&] { mediator->connect_child(child, child_endpoint(child)); });
      with_retries([&] { mediator->refresh_schema(); });
      auto listener = std::make_shared<TcpListener>(component_port(t, id, base_port), "127.0.0.1");
      TcpServer server(listener, mediator);
      wait_loop();
      server.stop();
      break;
    }
    case NodeKind::Mask: {
      std::unique_ptr<MaskModule> mask = detail::make_mask(*c);
      std::string child = t.children_of(id).at(0);
      const ComponentDecl* peer = t.find_component(child);
      with_retries([&] {
        mask->attach_checked(child_endpoint(child), peer->kind == NodeKind::Wrapper
                                                        ? ComponentType::Wrapper
                                                        : ComponentType::Mediator);
      });
      with_retries([&] { mask->load_schema(); });
      // The HTTP kind serves its representation on the component port; other
      // kinds hold the schema and idle (their facade is the CLI).
      if (c->config.value("kind", std::string(kTabularMaskKind)) == kHttpMaskKind) {
        HttpMaskApp app(*mask);
        app.start("127.0.0.1", component_port(t, id, base_port));
        wait_loop();
        app.stop();
      } else {
        wait_loop();
      }
      break;
    }
  }
}

}  // namespace mmw
