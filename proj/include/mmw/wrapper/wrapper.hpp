#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "mmw/comms/server.hpp"
#include "mmw/core/eval.hpp"
#include "mmw/core/query.hpp"
#include "mmw/core/schema.hpp"
#include "mmw/wrapper/adapter.hpp"

namespace mmw {

// Split of a query into the part the source executes natively and the
// compensation the wrapper applies to native results. Composing compensation
// after native_query is semantically equal to the original query.
struct PushdownPlan {
  CanonicalQuery native_query;
  CanonicalQuery compensation;
};

namespace detail {

inline bool ops_supported(const Predicate& p, const std::set<CmpOp>& ops) {
  if (p.kind == Predicate::Kind::Compare) return ops.count(p.op) > 0;
  for (const auto& c : p.children)
    if (!ops_supported(c, ops)) return false;
  return true;
}

}  // namespace detail

// Splits `query` into the maximal native part expressible under `caps` plus
// compensation. Top-level AND conjuncts whose comparison ops are all
// supported go native; projection goes native only when the residual
// selection references projected attributes only; limit goes native only
// when the whole selection did.
inline PushdownPlan plan_pushdown(const CanonicalQuery& query, const WrapperCapabilities& caps) {
  PushdownPlan plan;
  plan.native_query.target = query.target;
  plan.compensation.target = query.target;

  std::vector<Predicate> native_conjuncts;
  std::vector<Predicate> residual_conjuncts;
  if (query.selection) {
    std::vector<Predicate> conjuncts;
    detail::collect_conjuncts(*query.selection, conjuncts);
    for (auto& c : conjuncts) {
      if (caps.supports_selection && detail::ops_supported(c, caps.supported_ops))
        native_conjuncts.push_back(std::move(c));
      else
        residual_conjuncts.push_back(std::move(c));
    }
  }
  bool full_selection_pushed = residual_conjuncts.empty();
  plan.compensation.selection = detail::conjoin(std::move(residual_conjuncts));
  plan.native_query.selection = detail::conjoin(std::move(native_conjuncts));

  bool push_projection = false;
  if (caps.supports_projection && !query.projection.empty()) {
    std::set<std::string> residual_attrs;
    if (plan.compensation.selection)
      detail::collect_attributes(*plan.compensation.selection, residual_attrs);
    push_projection = true;
    for (const auto& attr : residual_attrs) {
      if (std::find(query.projection.begin(), query.projection.end(), attr) ==
          query.projection.end()) {
        push_projection = false;
        break;
      }
    }
  }
  if (push_projection)
    plan.native_query.projection = query.projection;
  else
    plan.compensation.projection = query.projection;

  if (query.limit) {
    if (caps.supports_limit && full_selection_pushed)
      plan.native_query.limit = query.limit;
    else
      plan.compensation.limit = query.limit;
  }
  return plan;
}

// The wrapper component: binds exactly one source adapter, derives and
// caches the LCS, and answers system-format queries against the source.
class Wrapper : public ComponentService {
public:
  Wrapper(std::string id, std::unique_ptr<SourceAdapter> adapter)
      : id_(std::move(id)), adapter_(std::move(adapter)) {}

  std::string component_id() const override { return id_; }
  ComponentType component_type() const override { return ComponentType::Wrapper; }

  const SourceAdapter& adapter() const { return *adapter_; }

  // One relation per source collection; role LCS, provenance = source id.
  CanonicalSchema derive_lcs() {
    CanonicalSchema lcs;
    lcs.name = id_ + "_lcs";
    lcs.role = SchemaRole::LCS;
    lcs.provenance = {adapter_->id()};
    for (const auto& collection : adapter_->collections())
      lcs.relations.push_back(adapter_->schema_hint(collection));
    {
      std::lock_guard lock(mu_);
      cached_lcs_ = std::make_shared<CanonicalSchema>(lcs);
    }
    return lcs;
  }

  CanonicalSchema exported_schema() override {
    if (auto snap = lcs_snapshot()) return *snap;
    return derive_lcs();
  }

  // Equals evaluate_query_oracle(query, full source contents). The native
  // side of the pushdown plan runs against the source under its declared
  // capabilities; the wrapper compensates the rest.
  CanonicalResult execute(const CanonicalQuery& query) override {
    std::shared_ptr<const CanonicalSchema> lcs = lcs_snapshot();
    if (!lcs) lcs = std::make_shared<CanonicalSchema>(derive_lcs());

    // Detect drift before answering; never silently re-map.
    RelationDef current;
    try {
      current = adapter_->schema_hint(query.target);
    } catch (const Error& e) {
      if (e.code() == "source-unreachable") throw;
      throw Error("schema-drift", "collection '" + query.target + "': " + e.detail());
    }
    const RelationDef* cached = lcs->find_relation(query.target);
    if (!cached) {
      TypecheckResult tc = typecheck_query(query, *lcs);
      throw Error("unknown-relation", tc.errors.empty() ? query.target : tc.errors[0].detail);
    }
    if (current != *cached)
      throw Error("schema-drift",
                  "source '" + adapter_->id() + "' no longer matches the cached LCS for '" +
                      query.target + "'");

    TypecheckResult tc = typecheck_query(query, *lcs);
    if (!tc.ok()) throw Error(tc.errors[0].code, tc.errors[0].detail);

    PushdownPlan plan = plan_pushdown(*tc.query, adapter_->capabilities());
    RelationData source{*cached, adapter_->scan(query.target)};
    CanonicalResult native = evaluate_query_oracle(plan.native_query, source, id_);
    RelationData intermediate{RelationDef{query.target, native.attributes},
                              std::move(native.rows)};
    return evaluate_query_oracle(plan.compensation, intermediate, id_);
  }

private:
  std::shared_ptr<const CanonicalSchema> lcs_snapshot() const {
    std::lock_guard lock(mu_);
    return cached_lcs_;
  }

  std::string id_;
  std::unique_ptr<SourceAdapter> adapter_;
  mutable std::mutex mu_;
  std::shared_ptr<const CanonicalSchema> cached_lcs_;
};

}  // namespace mmw
