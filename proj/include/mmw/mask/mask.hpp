#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

#include "mmw/comms/node.hpp"
#include "mmw/core/mapping.hpp"
#include "mmw/core/query.hpp"
#include "mmw/core/schema.hpp"

namespace mmw {

// A kind-specific schema/query/result representation: opaque payload bytes
// tagged with the producing kind and a content type.
struct MaskedBlob {
  std::string kind;
  std::string content_type;
  std::string bytes;
};

// Error attributed to the pipeline stage that raised it. Stages:
// "not-ready", "translate-query" (bad masked input), "system" (downstream
// failure), "translate-result".
class StageError : public Error {
public:
  StageError(std::string stage, std::string code, std::string detail)
      : Error(std::move(code), std::move(detail)), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

// The three per-kind plug-ins. A new mask kind implements exactly these
// three plus a mask application on the facade; the mask module core stays
// untouched. Translators see only the masked (view) schema; reversal to
// system names happens in the core through the name correspondence.
class SchemaTranslator {
public:
  virtual ~SchemaTranslator() = default;
  virtual std::string kind() const = 0;
  virtual MaskedBlob render_schema(const CanonicalSchema& view) = 0;
};

class QueryTranslator {
public:
  virtual ~QueryTranslator() = default;
  // Parses a masked query into a view-level CanonicalQuery. Throws
  // unknown-masked-resource, unknown-masked-field, malformed-masked-query.
  virtual CanonicalQuery parse_query(const MaskedBlob& query, const CanonicalSchema& view) = 0;
};

class ResultTranslator {
public:
  virtual ~ResultTranslator() = default;
  virtual MaskedBlob render_result(const CanonicalResult& view_result) = 0;
};

struct MaskOptions {
  std::chrono::seconds refresh_interval{30};
  bool stale_allowed = true;
  bool allow_wrapper_downstream = false;
};

// The mask component core: cap-1 comm node, schema manager (fetch, store,
// refresh), query manager (translate -> execute -> translate back), and the
// mask application interface (get_masked_schema / run). Each request pins
// one schema snapshot.
class MaskModule {
public:
  MaskModule(std::string id, SchemaMapping mapping,
             std::shared_ptr<SchemaTranslator> schema_translator,
             std::shared_ptr<QueryTranslator> query_translator,
             std::shared_ptr<ResultTranslator> result_translator, MaskOptions options = {})
      : id_(std::move(id)),
        mapping_(std::move(mapping)),
        schema_translator_(std::move(schema_translator)),
        query_translator_(std::move(query_translator)),
        result_translator_(std::move(result_translator)),
        options_(options),
        node_(id_, ComponentType::Mask, /*max_downstream=*/1) {
    // Representation must stay reversible to a single system query, so the
    // mask-level mapping is limited to renames and hides.
    for (const auto& rule : mapping_.rules) {
      if (rule.kind == MappingRule::Kind::UnionRelations ||
          rule.kind == MappingRule::Kind::JoinView)
        throw Error("unsupported-mask-mapping-rule",
                    "union/join rules belong in mediators, not mask mappings");
    }
  }

  ~MaskModule() { stop_refresh(); }

  MaskModule(const MaskModule&) = delete;
  MaskModule& operator=(const MaskModule&) = delete;

  const std::string& id() const { return id_; }
  CommNode& node() { return node_; }
  const std::string& last_warning() const { return warning_; }

  // Connects the single downstream link (RMa2: the cap-1 node refuses a
  // second). A wrapper peer is refused unless explicitly allowed.
  void attach(const Endpoint& endpoint) {
    std::shared_ptr<DownstreamLink> link = node_.connect_downstream(endpoint);
    link_ = std::move(link);
  }

  void attach_checked(const Endpoint& endpoint, ComponentType peer_kind) {
    if (peer_kind == ComponentType::Wrapper && !options_.allow_wrapper_downstream)
      throw Error("wrapper-downstream-refused",
                  "mask '" + id_ + "' may only connect to a mediator (set "
                  "allow_wrapper_downstream to override)");
    if (peer_kind == ComponentType::Wrapper)
      warning_ = "mask '" + id_ + "' is connected directly to a wrapper; further "
                 "mediation on that source is impossible";
    attach(endpoint);
  }

  bool ready() const {
    std::lock_guard lock(mu_);
    return snapshot_ != nullptr;
  }

  // Schema manager: fetch the system schema, apply the kind mapping, swap
  // the stored snapshot atomically. On fetch failure with a prior snapshot
  // and stale_allowed, the prior snapshot is retained and a warning kept.
  CanonicalSchema load_schema() {
    if (!link_) throw StageError("not-ready", "not-ready", "no downstream link");
    CanonicalSchema system;
    try {
      system = link_->request_schema();
    } catch (const Error& e) {
      std::lock_guard lock(mu_);
      if (snapshot_ && options_.stale_allowed) {
        warning_ = "schema refresh failed (" + e.code() + "); serving prior snapshot";
        return snapshot_->system;
      }
      throw StageError("not-ready", e.code(), e.detail());
    }
    MappedSchema mapped = apply_schema_mapping(system, mapping_);
    auto snap = std::make_shared<Snapshot>();
    snap->system = system;
    snap->view = std::move(mapped.schema);
    snap->view.name = id_ + "_view";
    snap->view.role = SchemaRole::GES;
    snap->view.provenance = {system.name};
    snap->correspondence = std::move(mapped.correspondence);
    snap->fetched_at = std::chrono::system_clock::now();
    {
      std::lock_guard lock(mu_);
      snapshot_ = std::move(snap);
    }
    return system;
  }

  void start_refresh() {
    if (refresh_thread_.joinable()) return;
    stop_requested_ = false;
    refresh_thread_ = std::thread([this] {
      std::unique_lock lock(refresh_mu_);
      while (!stop_requested_) {
        if (refresh_cv_.wait_for(lock, options_.refresh_interval,
                                 [this] { return stop_requested_.load(); }))
          break;
        try {
          load_schema();
        } catch (...) {
          // keep serving the prior snapshot; load_schema recorded the warning
        }
      }
    });
  }

  void stop_refresh() {
    {
      std::lock_guard lock(refresh_mu_);
      stop_requested_ = true;
      refresh_cv_.notify_all();
    }
    if (refresh_thread_.joinable()) refresh_thread_.join();
  }

  // --- Mask application interface -----------------------------------------

  MaskedBlob get_masked_schema() {
    return schema_translator_->render_schema(pin()->view);
  }

  // Query manager: one schema snapshot across the whole chain.
  MaskedBlob run(const MaskedBlob& masked_query) {
    std::shared_ptr<const Snapshot> snap = pin();

    CanonicalQuery view_query;
    try {
      view_query = query_translator_->parse_query(masked_query, snap->view);
    } catch (const Error& e) {
      throw StageError("translate-query", e.code(), e.detail());
    }

    const RelBinding* binding = snap->correspondence.find(view_query.target);
    if (!binding)
      throw StageError("translate-query", "unknown-masked-resource",
                       "no resource '" + view_query.target + "'");
    CanonicalQuery system_query;
    try {
      system_query = reverse_translate_query(view_query, binding->bases[0]);
    } catch (const Error& e) {
      throw StageError("translate-query", e.code(), e.detail());
    }
    TypecheckResult tc = typecheck_query(system_query, snap->system);
    if (!tc.ok())
      throw StageError("translate-query", tc.errors[0].code, tc.errors[0].detail);

    CanonicalResult system_result;
    try {
      system_result = link_->execute_query(*tc.query);
    } catch (const Error& e) {
      throw StageError("system", e.code(), e.detail());
    }

    CanonicalResult view_result;
    try {
      view_result = forward_translate_result(system_result, binding->bases[0]);
    } catch (const Error& e) {
      throw StageError("translate-result", e.code(), e.detail());
    }
    view_result.origin = id_;
    return result_translator_->render_result(view_result);
  }

  // Streaming delivery for the facade: the rendered result is handed to the
  // sink in chunks (currently one).
  void run(const MaskedBlob& masked_query, const std::function<void(const MaskedBlob&)>& sink) {
    sink(run(masked_query));
  }

private:
  struct Snapshot {
    CanonicalSchema system;
    CanonicalSchema view;
    NameCorrespondence correspondence;
    std::chrono::system_clock::time_point fetched_at;
  };

  std::shared_ptr<const Snapshot> pin() const {
    std::lock_guard lock(mu_);
    if (!snapshot_)
      throw StageError("not-ready", "not-ready", "mask '" + id_ + "' has no schema yet");
    return snapshot_;
  }

  std::string id_;
  SchemaMapping mapping_;
  std::shared_ptr<SchemaTranslator> schema_translator_;
  std::shared_ptr<QueryTranslator> query_translator_;
  std::shared_ptr<ResultTranslator> result_translator_;
  MaskOptions options_;
  CommNode node_;
  std::shared_ptr<DownstreamLink> link_;
  mutable std::mutex mu_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::string warning_;

  std::mutex refresh_mu_;
  std::condition_variable refresh_cv_;
  std::atomic<bool> stop_requested_{false};
  std::thread refresh_thread_;
};

}  // namespace mmw
