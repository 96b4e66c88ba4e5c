#pragma once

#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "mmw/comms/node.hpp"
#include "mmw/comms/server.hpp"
#include "mmw/core/eval.hpp"
#include "mmw/core/mapping.hpp"
#include "mmw/core/query.hpp"
#include "mmw/core/schema.hpp"

namespace mmw {

// How a mediator builds its GCS: child schemas are qualified as
// `alias_relation`, then the mapping runs on the qualified result.
struct IntegrationSpec {
  std::vector<std::pair<std::string, std::string>> children;  // (child id, alias)
  SchemaMapping mapping;
};

struct IntegratedSchema {
  CanonicalSchema gcs;
  NameCorrespondence correspondence;  // BaseBinding.child = child id
};

// Integrates child schemas into a GCS with a correspondence resolving every
// GCS name to (child, native name), or to a set for union/join views.
inline IntegratedSchema integrate_schemas(
    const std::vector<std::pair<std::string, CanonicalSchema>>& child_schemas,
    const IntegrationSpec& spec, const std::string& mediator_id) {
  std::map<std::string, std::string> alias_of;
  for (const auto& [child_id, alias] : spec.children) {
    if (!alias_of.emplace(child_id, alias).second)
      throw Error("alias-collision", "child '" + child_id + "' listed twice");
    for (const auto& [other_id, other_alias] : spec.children)
      if (other_id != child_id && other_alias == alias)
        throw Error("alias-collision", "alias '" + alias + "' used for two children");
  }

  // Qualification pass: one combined schema, relations renamed alias_relation.
  CanonicalSchema qualified;
  qualified.name = mediator_id + "_gcs";
  qualified.role = SchemaRole::GCS;
  NameCorrespondence qual_corr;
  for (const auto& [child_id, alias] : spec.children) {
    bool found = false;
    for (const auto& [id, schema] : child_schemas) {
      if (id != child_id) continue;
      found = true;
      qualified.provenance.push_back(schema.name);
      for (const auto& rel : schema.relations) {
        std::string qname = alias + "_" + rel.name;
        if (qualified.find_relation(qname))
          throw Error("alias-collision", "qualified name '" + qname + "' collides");
        RelationDef qrel = rel;
        qrel.name = qname;
        qualified.relations.push_back(std::move(qrel));
        RelBinding b;
        b.kind = RelBinding::Kind::Base;
        BaseBinding base;
        base.child = child_id;
        base.relation = rel.name;
        for (const auto& a : rel.attributes) base.attrs.emplace_back(a.name, a.name);
        b.bases.push_back(std::move(base));
        qual_corr.relations.emplace(qname, std::move(b));
      }
    }
    if (!found)
      throw Error("dangling-name-reference", "spec references unknown child '" + child_id + "'");
  }

  // Mapping pass, then substitute qualified base refs with child attribution.
  MappedSchema mapped = apply_schema_mapping(qualified, spec.mapping);
  IntegratedSchema out;
  out.gcs = std::move(mapped.schema);
  out.gcs.name = mediator_id + "_gcs";
  out.gcs.role = SchemaRole::GCS;
  for (auto& [visible, binding] : mapped.correspondence.relations) {
    for (auto& base : binding.bases) {
      const RelBinding& qb = qual_corr.relations.at(base.relation);
      const BaseBinding& origin = qb.bases[0];
      base.child = origin.child;
      // Compose attribute maps: visible -> qualified-native == original native
      // (qualification leaves attribute names untouched).
      base.relation = origin.relation;
    }
    out.correspondence.relations.emplace(visible, std::move(binding));
  }
  return out;
}

// A decomposed query: per-child sub-queries in native names, a combiner, and
// a residual query evaluated on the combined rows.
struct MergePlan {
  struct SubQuery {
    std::string child;
    CanonicalQuery query;
    // Visible names, in output order, for each column the sub-query returns.
    std::vector<std::string> visible_columns;
  };

  enum class Combiner { Passthrough, UnionAll, EquiJoin };

  Combiner combiner = Combiner::Passthrough;
  std::vector<SubQuery> subqueries;  // union: alias order; join: [left, right]
  // EquiJoin only: visible names of the key columns.
  std::string left_key;
  std::string right_key;
  // Combined relation as seen by the residual query.
  RelationDef combined;
  CanonicalQuery residual;
};

namespace detail {

inline std::vector<std::string> visible_names(const BaseBinding& base) {
  std::vector<std::string> out;
  for (const auto& [vis, nat] : base.attrs) out.push_back(vis);
  return out;
}

// Conjuncts referencing only the given attribute set.
inline void split_conjuncts(const std::optional<Predicate>& selection,
                            const std::set<std::string>& side,
                            std::vector<Predicate>& onto, std::vector<Predicate>& rest) {
  if (!selection) return;
  std::vector<Predicate> conjuncts;
  collect_conjuncts(*selection, conjuncts);
  for (auto& c : conjuncts) {
    std::set<std::string> attrs;
    collect_attributes(c, attrs);
    bool contained = true;
    for (const auto& a : attrs)
      if (!side.count(a)) contained = false;
    (contained ? onto : rest).push_back(std::move(c));
  }
}

}  // namespace detail

// Decomposes a typechecked GCS query into a MergePlan. Only the children
// that own the target relation appear in the plan.
inline MergePlan decompose_query(const CanonicalQuery& query, const CanonicalSchema& gcs,
                                 const NameCorrespondence& corr) {
  const RelBinding* binding = corr.find(query.target);
  const RelationDef* visible_rel = gcs.find_relation(query.target);
  if (!binding || !visible_rel)
    throw Error("unresolvable-name", "no source binding for relation '" + query.target + "'");

  MergePlan plan;
  plan.combined = *visible_rel;

  switch (binding->kind) {
    case RelBinding::Kind::Base: {
      plan.combiner = MergePlan::Combiner::Passthrough;
      MergePlan::SubQuery sub;
      sub.child = binding->bases[0].child;
      sub.query = reverse_translate_query(query, binding->bases[0]);
      sub.visible_columns = query.projection.empty()
                                ? detail::visible_names(binding->bases[0])
                                : query.projection;
      plan.subqueries.push_back(std::move(sub));
      // Everything pushed; residual is the identity query.
      plan.residual.target = query.target;
      plan.combined.attributes.clear();
      for (const auto& col : plan.subqueries[0].visible_columns)
        plan.combined.attributes.push_back(*visible_rel->find_attribute(col));
      break;
    }
    case RelBinding::Kind::Union: {
      plan.combiner = MergePlan::Combiner::UnionAll;
      // Selection and projection are cloned to every child; limit stays
      // residual so the combined row count is cut only after concatenation.
      CanonicalQuery pushed = query;
      pushed.limit.reset();
      for (const auto& base : binding->bases) {
        MergePlan::SubQuery sub;
        sub.child = base.child;
        sub.query = reverse_translate_query(pushed, base);
        sub.visible_columns =
            query.projection.empty() ? detail::visible_names(base) : query.projection;
        plan.subqueries.push_back(std::move(sub));
      }
      plan.combined.attributes.clear();
      for (const auto& col : plan.subqueries[0].visible_columns)
        plan.combined.attributes.push_back(*visible_rel->find_attribute(col));
      plan.residual.target = query.target;
      plan.residual.limit = query.limit;
      break;
    }
    case RelBinding::Kind::Join: {
      plan.combiner = MergePlan::Combiner::EquiJoin;
      const BaseBinding& left = binding->bases[0];
      const BaseBinding& right = binding->bases[1];
      const std::string* lk = left.visible_attr(binding->left_key);
      const std::string* rk = right.visible_attr(binding->right_key);
      if (!lk || !rk)
        throw Error("unresolvable-name", "join key of '" + query.target + "' is not visible");
      plan.left_key = *lk;
      plan.right_key = *rk;

      // Single-side conjuncts push below the join; cross-side ones stay.
      std::set<std::string> left_attrs, right_attrs;
      for (const auto& [vis, nat] : left.attrs) left_attrs.insert(vis);
      for (const auto& [vis, nat] : right.attrs) right_attrs.insert(vis);
      std::vector<Predicate> left_push, right_push, residual;
      detail::split_conjuncts(query.selection, left_attrs, left_push, residual);
      std::vector<Predicate> still_residual;
      detail::split_conjuncts(detail::conjoin(std::move(residual)), right_attrs, right_push,
                              still_residual);

      for (const BaseBinding* base : {&left, &right}) {
        MergePlan::SubQuery sub;
        sub.child = base->child;
        CanonicalQuery side_query;
        side_query.target = query.target;  // rewritten below
        side_query.selection =
            detail::conjoin(base == &left ? std::move(left_push) : std::move(right_push));
        CanonicalQuery visible_side = side_query;
        sub.query = reverse_translate_query(visible_side, *base);
        sub.visible_columns = detail::visible_names(*base);
        plan.subqueries.push_back(std::move(sub));
      }
      plan.residual.target = query.target;
      plan.residual.selection = detail::conjoin(std::move(still_residual));
      plan.residual.projection = query.projection;
      plan.residual.limit = query.limit;
      break;
    }
  }
  return plan;
}

// Applies the combiner, then the residual query. Union-all concatenates in
// plan order; equi-join is a nested-loop inner join, left row order outer.
inline CanonicalResult merge_results(const std::map<std::string, CanonicalResult>& partials,
                                     const MergePlan& plan, const std::string& origin) {
  std::vector<CanonicalResult> parts;
  for (std::size_t i = 0; i < plan.subqueries.size(); ++i) {
    const auto& sub = plan.subqueries[i];
    // Join plans may query the same child twice; partials are keyed by child,
    // so a missing entry is detected per sub-query.
    auto it = partials.find(sub.child + "#" + std::to_string(i));
    if (it == partials.end()) it = partials.find(sub.child);
    if (it == partials.end())
      throw Error("missing-partial", "no partial result from child '" + sub.child + "'");
    CanonicalResult renamed = it->second;
    if (renamed.attributes.size() != sub.visible_columns.size())
      throw Error(plan.combiner == MergePlan::Combiner::UnionAll ? "union-arity-mismatch"
                                                                 : "merge-arity-mismatch",
                  "child '" + sub.child + "' returned " +
                      std::to_string(renamed.attributes.size()) + " columns, expected " +
                      std::to_string(sub.visible_columns.size()));
    for (std::size_t j = 0; j < renamed.attributes.size(); ++j)
      renamed.attributes[j].name = sub.visible_columns[j];
    parts.push_back(std::move(renamed));
  }

  RelationData combined;
  combined.schema = plan.combined;
  combined.schema.name = plan.residual.target;

  switch (plan.combiner) {
    case MergePlan::Combiner::Passthrough:
      combined.rows = std::move(parts[0].rows);
      break;
    case MergePlan::Combiner::UnionAll:
      for (auto& part : parts) {
        if (part.attributes.size() != combined.schema.attributes.size())
          throw Error("union-arity-mismatch", "partial arity differs from plan");
        for (auto& row : part.rows) combined.rows.push_back(std::move(row));
      }
      break;
    case MergePlan::Combiner::EquiJoin: {
      const CanonicalResult& left = parts[0];
      const CanonicalResult& right = parts[1];
      std::size_t li = 0, ri = 0;
      while (li < left.attributes.size() && left.attributes[li].name != plan.left_key) ++li;
      while (ri < right.attributes.size() && right.attributes[ri].name != plan.right_key) ++ri;
      if (li == left.attributes.size() || ri == right.attributes.size())
        throw Error("unresolvable-name", "join key column missing from partials");
      for (const Row& lrow : left.rows) {
        if (lrow[li].is_null()) continue;
        for (const Row& rrow : right.rows) {
          if (rrow[ri].is_null()) continue;
          if (!(lrow[li] == rrow[ri])) continue;
          Row joined = lrow;
          joined.insert(joined.end(), rrow.begin(), rrow.end());
          combined.rows.push_back(std::move(joined));
        }
      }
      break;
    }
  }
  return evaluate_query_oracle(plan.residual, combined, origin);
}

// The mediator component: integrates child schemas, decomposes queries,
// dispatches sub-queries in parallel, merges partial results. Stackable:
// children are anything answering the comms schema/query interface.
class Mediator : public ComponentService {
public:
  Mediator(std::string id, IntegrationSpec spec)
      : id_(std::move(id)),
        spec_(std::move(spec)),
        node_(std::make_shared<CommNode>(id_, ComponentType::Mediator)) {}

  const std::string& id() const { return id_; }
  CommNode& node() { return *node_; }

  void connect_child(const std::string& child_id, const Endpoint& endpoint) {
    links_[child_id] = node_->connect_downstream(endpoint);
  }

  // Pulls child schemas and recomputes the GCS; atomic swap, queries in
  // flight finish against their snapshot.
  void refresh_schema() {
    std::vector<std::pair<std::string, CanonicalSchema>> child_schemas;
    for (const auto& [child_id, alias] : spec_.children) {
      auto it = links_.find(child_id);
      if (it == links_.end())
        throw Error("missing-partial", "child '" + child_id + "' is not connected");
      try {
        child_schemas.emplace_back(child_id, it->second->request_schema());
      } catch (const Error& e) {
        throw Error(e.code(), "child '" + child_id + "': " + e.detail());
      }
    }
    auto integrated =
        std::make_shared<const IntegratedSchema>(integrate_schemas(child_schemas, spec_, id_));
    std::lock_guard lock(mu_);
    integrated_ = std::move(integrated);
  }

  std::string component_id() const override { return id_; }
  ComponentType component_type() const override { return ComponentType::Mediator; }

  // RMe3: the exported schema is always the GCS, never a representation.
  CanonicalSchema exported_schema() override { return snapshot()->gcs; }

  CanonicalResult execute(const CanonicalQuery& query) override {
    std::shared_ptr<const IntegratedSchema> snap = snapshot();
    TypecheckResult tc = typecheck_query(query, snap->gcs);
    if (!tc.ok()) throw Error(tc.errors[0].code, tc.errors[0].detail);
    MergePlan plan = decompose_query(*tc.query, snap->gcs, snap->correspondence);

    std::vector<std::future<CanonicalResult>> futures;
    for (const auto& sub : plan.subqueries) {
      auto it = links_.find(sub.child);
      if (it == links_.end())
        throw Error("missing-partial", "child '" + sub.child + "' is not connected");
      std::shared_ptr<DownstreamLink> link = it->second;
      CanonicalQuery q = sub.query;
      futures.push_back(std::async(std::launch::async,
                                   [link, q] { return link->execute_query(q); }));
    }
    std::map<std::string, CanonicalResult> partials;
    for (std::size_t i = 0; i < futures.size(); ++i) {
      try {
        partials[plan.subqueries[i].child + "#" + std::to_string(i)] = futures[i].get();
      } catch (const Error& e) {
        throw PeerError(e.code(), "child '" + plan.subqueries[i].child + "': " + e.detail());
      }
    }
    return merge_results(partials, plan, id_);
  }

private:
  std::shared_ptr<const IntegratedSchema> snapshot() {
    std::shared_ptr<const IntegratedSchema> snap;
    {
      std::lock_guard lock(mu_);
      snap = integrated_;
    }
    if (!snap) {
      refresh_schema();
      std::lock_guard lock(mu_);
      snap = integrated_;
    }
    return snap;
  }

  std::string id_;
  IntegrationSpec spec_;
  std::shared_ptr<CommNode> node_;
  std::map<std::string, std::shared_ptr<DownstreamLink>> links_;
  std::mutex mu_;
  std::shared_ptr<const IntegratedSchema> integrated_;
};

}  // namespace mmw
